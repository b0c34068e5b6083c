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

#include "bagforge/kb_store.hpp"

#include <gtest/gtest.h>

#include <regex>

#include "bagforge/error.hpp"
#include "test_util.hpp"

namespace bagforge {
namespace {

using testutil::error_of;
using testutil::TempDir;
using testutil::write_file;

constexpr const char* kEntities =
    R"({"cui": "C1", "forms": ["Neurofibromatosis 1", "NF1"]})" "\n"
    R"({"cui": "C2", "forms": ["breast cancer", "Breast  Cancer", "mammary carcinoma", "breast tumour"]})" "\n"
    R"({"cui": "C3", "forms": ["aspirin"]})" "\n";

struct KbFiles {
  TempDir dir;
  std::filesystem::path triples = dir / "triples.tsv";
  std::filesystem::path entities = dir / "entities.jsonl";
  explicit KbFiles(const std::string& triples_text, const std::string& entities_text = kEntities) {
    write_file(triples, triples_text);
    write_file(entities, entities_text);
  }
};

TEST(LoadKb, CountsTriplesAndVocabulary) {
  KbFiles f("C1\tro_a\tC2\nC2\tro_b\tC3\nC3\tro_c\tC1\n");
  const auto kb = load_kb(f.triples, f.entities);
  EXPECT_EQ(kb.triples.size(), 3u);
  EXPECT_EQ(kb.relations.size(), 4u);
  EXPECT_EQ(kb.relations.name(kNA), "NA");
}

TEST(LoadKb, DeduplicatesRepeatedLines) {
  KbFiles f("C1\tro_a\tC2\nC1\tro_a\tC2\n");
  KbLoadStats stats;
  const auto kb = load_kb(f.triples, f.entities, {}, &stats);
  EXPECT_EQ(kb.triples.size(), 1u);
  EXPECT_EQ(stats.duplicates, 1u);
  EXPECT_EQ(stats.lines, 2u);
}

TEST(LoadKb, NormalisesAndDeduplicatesForms) {
  KbFiles f("C1\tro_a\tC2\n");
  const auto kb = load_kb(f.triples, f.entities);
  const auto& forms = kb.entities[kb.entities.id_of("C2")].forms;
  EXPECT_EQ(forms, (std::vector<std::string>{"breast cancer", "mammary carcinoma", "breast tumour"}));
  EXPECT_EQ(kb.entities[kb.entities.id_of("C1")].forms[1], "nf1");
}

TEST(LoadKb, RelationFilterDropsRelationsFromVocab) {
  KbFiles f("C1\tro_a\tC2\nC2\tisa\tC3\nC3\tro_c\tC1\n");
  const std::regex ro("^ro_.*");
  KbLoadStats stats;
  const auto kb = load_kb(
      f.triples, f.entities, [&](std::string_view n) { return std::regex_match(std::string(n), ro); },
      &stats);
  EXPECT_EQ(kb.triples.size(), 2u);
  EXPECT_EQ(kb.relations.size(), 3u);
  EXPECT_EQ(kb.relations.find("isa"), nullptr);
  EXPECT_EQ(stats.filtered, 1u);
}

TEST(LoadKb, MalformedLineReportsLineNumber) {
  KbFiles f("C1\tro_a\tC2\nC1 ro_a C2\n");
  try {
    load_kb(f.triples, f.entities);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMalformedInput);
    EXPECT_NE(std::string(e.what()).find("triples.tsv:2"), std::string::npos) << e.what();
  }
}

TEST(LoadKb, UnknownEntityNamesTheId) {
  KbFiles f("C1\tro_a\tC99\n");
  try {
    load_kb(f.triples, f.entities);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownEntity);
    EXPECT_NE(std::string(e.what()).find("C99"), std::string::npos);
  }
}

TEST(LoadKb, ReservedAndBrokenInputsAreRejected) {
  EXPECT_EQ(error_of([] { KbFiles f("C1\tNA\tC2\n"); load_kb(f.triples, f.entities); }),
            Errc::kMalformedInput);
  EXPECT_EQ(error_of([] {
              KbFiles f("", std::string(kEntities) + R"({"cui": "C1", "forms": ["x"]})" "\n");
              load_entities(f.entities);
            }),
            Errc::kMalformedInput);
  EXPECT_EQ(error_of([] { KbFiles f("", "{not json}\n"); load_entities(f.entities); }),
            Errc::kMalformedInput);
  EXPECT_EQ(error_of([] { load_kb("/nonexistent/t.tsv", "/nonexistent/e.jsonl"); }), Errc::kIo);
}

TEST(LoadKb, IdempotentSerialisedForm) {
  KbFiles f("C3\tro_c\tC1\nC1\tro_a\tC2\nC2\tro_b\tC3\nC1\tro_a\tC2\n");
  TempDir out;
  write_kb(load_kb(f.triples, f.entities), out / "a");
  write_kb(load_kb(f.triples, f.entities), out / "b");
  for (const char* name : {"entities.jsonl", "triples.tsv", "relations.json"}) {
    EXPECT_EQ(testutil::read_file(out / (std::string("a/") + name)),
              testutil::read_file(out / (std::string("b/") + name)))
        << name;
  }
  // Reloading the written KB reproduces it.
  const auto again = load_kb(out / "a/triples.tsv", out / "a/entities.jsonl");
  write_kb(again, out / "c");
  EXPECT_EQ(testutil::read_file(out / "a/triples.tsv"), testutil::read_file(out / "c/triples.tsv"));
}

TEST(GroupIndex, MergesRelationsPerOrderedPair) {
  const EntityId a{0}, b{1};
  const RelationId r1{1}, r2{2};
  const auto index = build_group_index({{a, r1, b}, {a, r2, b}, {b, r1, a}});
  EXPECT_EQ(index.size(), 2u);
  EXPECT_EQ(index.relations({a, b}), (std::vector<RelationId>{r1, r2}));
  EXPECT_EQ(index.relations({b, a}), (std::vector<RelationId>{r1}));
  EXPECT_TRUE(index.relations({a, EntityId{5}}).empty());
}

TEST(GroupIndex, AccountingMatchesTripleCount) {
  KbFiles f("C1\tro_a\tC2\nC1\tro_b\tC2\nC2\tro_a\tC1\nC3\tro_a\tC1\n");
  const auto kb = load_kb(f.triples, f.entities);
  const auto index = build_group_index(kb.triples);
  std::size_t total = 0;
  for (const auto& g : index.positive_groups()) total += index.relations(g).size();
  EXPECT_EQ(total, kb.triples.size());
  for (const auto& t : kb.triples) {
    const auto& rels = index.relations(t.group());
    EXPECT_NE(std::find(rels.begin(), rels.end(), t.rel), rels.end());
  }
}

TEST(GroupIndex, NegativeMayNotCollideWithPositive) {
  auto index = build_group_index({{EntityId{0}, RelationId{1}, EntityId{1}}});
  EXPECT_THROW(index.mark_negative({EntityId{0}, EntityId{1}}), Error);
  index.mark_negative({EntityId{1}, EntityId{0}});
  EXPECT_TRUE(index.is_negative({EntityId{1}, EntityId{0}}));
}

TEST(TextualPairs, CartesianProductOfForms) {
  KbFiles f("");
  const auto entities = load_entities(f.entities);
  const Group g{entities.id_of("C1"), entities.id_of("C2")};
  const auto pairs = textual_pairs(g, entities);
  EXPECT_EQ(pairs.size(), 6u);
  EXPECT_EQ(pairs.front(), (std::pair<std::string, std::string>{"neurofibromatosis 1", "breast cancer"}));
  EXPECT_EQ(error_of([&] { textual_pairs({g.head, g.head}, entities); }), Errc::kSelfPair);
}

}  // namespace
}  // namespace bagforge
