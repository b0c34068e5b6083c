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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bagforge/bag_builder.hpp"
#include "bagforge/corpus_ingest.hpp"
#include "bagforge/evaluator.hpp"
#include "bagforge/group_linker.hpp"
#include "bagforge/mil_model.hpp"
#include "bagforge/synthgen.hpp"
#include "bagforge/tagging.hpp"
#include "bagforge/trainer.hpp"

namespace bagforge {

enum class Stage { kSynth, kKb, kCorpus, kMatch, kLink, kTag, kBags, kSplit, kTrain, kEval, kAll };

Stage parse_stage(std::string_view name);
std::string_view stage_name(Stage stage);

struct ModelConfig {
  EncoderKind encoder = EncoderKind::kLite;
  int d = 64;
  int lmax = 128;
  Aggregation agg = Aggregation::kAvg;
  std::filesystem::path archive;  // Precomputed: archive prefix
  double init_scale = 0.05;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  int workers = 0;  // <= 0: all processors
  std::filesystem::path work_dir = "work";
  // Empty inputs default to the synth outputs under work_dir.
  std::filesystem::path entities;
  std::filesystem::path triples;
  std::filesystem::path sentences;
  std::string relation_filter;  // ECMAScript regex on the full name; empty accepts all
  FilterConfig corpus;
  ConstraintConfig linker;
  TaggingScheme scheme = TaggingScheme::kKTag;
  std::size_t bag_size = 16;
  bool uniform_bags = true;
  SplitFractions split;
  ModelConfig model;
  TrainConfig train;
  std::vector<std::size_t> ks{std::begin(kDefaultKs), std::end(kDefaultKs)};
  SynthConfig synth;

  static nlohmann::json defaults_json();
  // Every key is optional; unknown keys throw kInvalidConfig naming the key.
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// "a.b=c" on a config document. The value is parsed as JSON when it is
// valid JSON, otherwise taken as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

// Artifact locations.
struct Layout {
  explicit Layout(const PipelineConfig& config);
  std::filesystem::path synth_dir, kb_dir, corpus, mentions, matches, link_relations,
      tagged, bags, split_dir, train, valid, test, manifest, checkpoint, meta, train_log,
      report, predictions, pr_curve;
  std::filesystem::path entities, triples, sentences;  // stage inputs
};

std::filesystem::path stats_path(const std::filesystem::path& output);

// Runs one stage (or all of kb..eval) and returns its stats, which are also
// written next to the stage output.
nlohmann::json run_stage(Stage stage, const PipelineConfig& config);

}  // namespace bagforge
