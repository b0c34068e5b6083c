// Copyright 2026 The Bagforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bagforge/pipeline.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <set>

#include "bagforge/error.hpp"
#include "bagforge/records.hpp"
#include "test_util.hpp"

namespace bagforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testutil::error_of;

json small_doc(const fs::path& work, int workers) {
  json doc = json::object();
  apply_override(doc, "paths.work_dir=" + work.string());
  apply_override(doc, "workers=" + std::to_string(workers));
  for (const char* o : {"synth.n_entities=40", "synth.n_relations=4", "synth.n_triples=120",
                        "synth.sentences_per_triple=5", "linker.min_group=1", "bags.bag_size=4",
                        "model.d=16", "model.lmax=48", "train.epochs=1", "train.lr=0.005"}) {
    apply_override(doc, o);
  }
  return doc;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).string()] = testutil::read_file(e.path());
    }
  }
  return out;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(BAGFORGE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(PipelineConfig, DefaultsRoundTrip) {
  const auto c = PipelineConfig::from_json(json::object());
  EXPECT_EQ(c.to_json(), PipelineConfig::defaults_json());
  EXPECT_EQ(c.linker.min_group, 10u);
  EXPECT_EQ(c.linker.max_group, 1500u);
  EXPECT_DOUBLE_EQ(c.linker.neg_to_pos_ratio, 0.7);
  EXPECT_EQ(c.bag_size, 16u);
  EXPECT_EQ(c.train.batch_size, 2u);
  EXPECT_EQ(c.train.epochs, 3);
  EXPECT_DOUBLE_EQ(c.train.lr, 2e-5);
  EXPECT_EQ(c.scheme, TaggingScheme::kKTag);
  EXPECT_EQ(PipelineConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(PipelineConfig, UnknownKeysAreRejected) {
  EXPECT_EQ(error_of([] { PipelineConfig::from_json({{"sed", 1}}); }), Errc::kInvalidConfig);
  EXPECT_EQ(error_of([] { PipelineConfig::from_json({{"train", {{"rate", 1}}}}); }),
            Errc::kInvalidConfig);
  EXPECT_EQ(error_of([] { PipelineConfig::from_json({{"model", {{"agg", "max"}}}}); }),
            Errc::kInvalidConfig);
  EXPECT_EQ(error_of([] { PipelineConfig::from_json({{"train", 3}}); }), Errc::kInvalidConfig);
}

TEST(PipelineConfig, Overrides) {
  json doc = json::object();
  apply_override(doc, "train.lr=0.01");
  apply_override(doc, "tagging.scheme=s-tag");
  apply_override(doc, "eval.ks=[10,20]");
  const auto c = PipelineConfig::from_json(doc);
  EXPECT_DOUBLE_EQ(c.train.lr, 0.01);
  EXPECT_EQ(c.scheme, TaggingScheme::kSTag);
  EXPECT_EQ(c.ks, (std::vector<std::size_t>{10, 20}));
  EXPECT_EQ(error_of([&] { apply_override(doc, "novalue"); }), Errc::kInvalidConfig);
}

TEST(PipelineConfig, StageNames) {
  for (const char* n : {"synth", "kb", "corpus", "match", "link", "tag", "bags", "split", "train",
                        "eval", "all"}) {
    EXPECT_EQ(stage_name(parse_stage(n)), n);
  }
  EXPECT_EQ(error_of([] { parse_stage("fit"); }), Errc::kInvalidConfig);
}

TEST(Pipeline, MissingInputIsAnIoError) {
  testutil::TempDir dir;
  auto c = PipelineConfig::from_json(small_doc(dir.path(), 1));
  EXPECT_EQ(error_of([&] { run_stage(Stage::kKb, c); }), Errc::kIo);
}

TEST(Pipeline, EndToEndInvariants) {
  testutil::TempDir dir;
  const auto c = PipelineConfig::from_json(small_doc(dir.path(), 2));
  run_stage(Stage::kSynth, c);
  const json all = run_stage(Stage::kAll, c);
  const Layout L(c);

  EXPECT_EQ(all["link"]["negatives_in_kb"], 0);
  EXPECT_GT(all["link"]["negative_matches"].get<int>(), 0);
  EXPECT_EQ(all["split"]["checks"]["fact_disjoint"], true);
  EXPECT_EQ(all["bags"]["sentences_sampled"].get<std::size_t>(),
            all["bags"]["bags"].get<std::size_t>() * 4);
  const double auc = all["eval"]["auc"];
  EXPECT_GE(auc, 0.0);
  EXPECT_LE(auc, 1.0);
  for (const auto& p : {L.corpus, L.mentions, L.matches, L.tagged, L.bags, L.manifest,
                        L.checkpoint, L.predictions}) {
    EXPECT_TRUE(fs::exists(stats_path(p))) << p;
  }

  // Every bag of the train split has exactly bag_size sentence ids.
  std::size_t lines = 0;
  for (const auto& line : testutil::read_lines(L.train)) {
    const json b = json::parse(line);
    EXPECT_EQ(b.at("sentences").size(), 4u);
    ++lines;
  }
  EXPECT_GT(lines, 0u);
}

TEST(Pipeline, ArtifactsIdenticalAcrossWorkerCounts) {
  testutil::TempDir dir;
  std::vector<std::map<std::string, std::string>> snaps;
  for (int w : {1, 4}) {
    const auto c = PipelineConfig::from_json(small_doc(dir / std::to_string(w), w));
    run_stage(Stage::kSynth, c);
    run_stage(Stage::kAll, c);
    snaps.push_back(snapshot(c.work_dir));
  }
  ASSERT_EQ(snaps[0].size(), snaps[1].size());
  for (const auto& [name, bytes] : snaps[0]) {
    ASSERT_TRUE(snaps[1].contains(name)) << name;
    EXPECT_TRUE(bytes == snaps[1].at(name)) << name;
  }
}

TEST(Pipeline, EvalRejectsSchemeMismatch) {
  testutil::TempDir dir;
  const auto c = PipelineConfig::from_json(small_doc(dir.path(), 1));
  run_stage(Stage::kSynth, c);
  run_stage(Stage::kAll, c);
  const Layout L(c);
  json meta = records::read_json(L.meta);
  meta["scheme"] = "s-tag";
  records::write_json(L.meta, meta);
  EXPECT_EQ(error_of([&] { run_stage(Stage::kEval, c); }), Errc::kInvalidConfig);
}

TEST(Cli, ExitCodes) {
  testutil::TempDir dir;
  const std::string work = "--set paths.work_dir=" + dir.path().string();
  EXPECT_EQ(cli("synth " + work + " --set synth.n_triples=50"), 0);
  EXPECT_EQ(cli("kb " + work), 0);
  EXPECT_EQ(cli("bogus"), 1);
  EXPECT_EQ(cli("kb " + work + " --set kb.nope=1"), 1);
  EXPECT_EQ(cli("kb --set paths.work_dir=" + (dir / "empty").string()), 1);
  EXPECT_EQ(cli("kb " + work + " --print-config"), 0);
  // Nothing survives the group bounds, so training has no bags.
  EXPECT_EQ(cli("all " + work + " --set linker.min_group=1000 --workers 1"), 2);
}

}  // namespace
}  // namespace bagforge
