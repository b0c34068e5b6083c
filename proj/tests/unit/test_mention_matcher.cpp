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

#include "bagforge/mention_matcher.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "bagforge/text.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

namespace bagforge {
namespace {

EntitySet make_entities(const std::vector<std::vector<std::string>>& forms) {
  EntitySet set;
  for (std::size_t i = 0; i < forms.size(); ++i) set.add({"C" + std::to_string(i), forms[i]});
  return set;
}

std::string slice(const std::string& text, const Mention& m) {
  const auto cps = text::decode_utf8(text).value();
  return text::encode_utf8(std::u32string_view(cps).substr(m.start, m.end - m.start));
}

TEST(MentionIndex, EmptyIndexMatchesNothing) {
  const auto index = MentionIndex::build(EntitySet{});
  EXPECT_TRUE(find_mentions(index, "breast cancer anywhere").empty());
  EXPECT_EQ(index.form_count(), 0u);
}

TEST(MentionIndex, SharedFormReturnsBothOwners) {
  const auto ents = make_entities({{"cold"}, {"cold", "common cold"}});
  const auto index = MentionIndex::build(ents);
  EXPECT_EQ(index.lookup(U"cold").size(), 2u);
  EXPECT_EQ(index.lookup(U"common cold").size(), 1u);
  EXPECT_TRUE(index.lookup(U"col").empty());
  const auto ms = find_mentions(index, "a cold day");
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].start, ms[1].start);
  EXPECT_NE(ms[0].entity, ms[1].entity);
}

TEST(FindMentions, FigureOneSentence) {
  const auto ents = make_entities({{"neurofibromatosis 1"}, {"breast cancer"}});
  const auto index = MentionIndex::build(ents);
  const std::string s =
      "women with neurofibromatosis 1 have a moderately elevated risk of breast cancer";
  const auto ms = find_mentions(index, s);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].start, 11u);
  EXPECT_EQ(ms[0].end, 30u);
  EXPECT_EQ(ms[1].start, 66u);
  EXPECT_EQ(ms[1].end, 79u);
  for (const auto& m : ms) EXPECT_EQ(slice(s, m), m.form);
  EXPECT_EQ(enforce_unique(ms), UniqueVerdict::kKeep);
}

TEST(FindMentions, LongestMatchWinsAndWordBoundariesHold) {
  const auto ents = make_entities({{"breast cancer"}, {"cancer"}});
  const auto index = MentionIndex::build(ents);
  const auto ms = find_mentions(index, "breast cancer");
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].form, "breast cancer");
  EXPECT_TRUE(find_mentions(index, "cancerous growth").empty());
  EXPECT_TRUE(find_mentions(index, "precancer").empty());
  EXPECT_EQ(find_mentions(index, "(cancer)").size(), 1u);
}

TEST(FindMentions, OffsetsCountCodePoints) {
  const auto ents = make_entities({{"\xC3\xA9tude"}});
  const auto index = MentionIndex::build(ents);
  const std::string s = "caf\xC3\xA9 \xC3\xA9tude";
  const auto ms = find_mentions(index, s);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].start, 5u);
  EXPECT_EQ(ms[0].end, 10u);
  EXPECT_EQ(slice(s, ms[0]), ms[0].form);
}

TEST(EnforceUnique, Verdicts) {
  const Mention a{EntityId{0}, 0, 3, "abc"};
  const Mention b{EntityId{1}, 4, 7, "def"};
  const Mention a2{EntityId{0}, 8, 11, "abc"};
  EXPECT_EQ(enforce_unique(std::vector<Mention>{a, b}), UniqueVerdict::kKeep);
  EXPECT_EQ(enforce_unique(std::vector<Mention>{a, b, a2}), UniqueVerdict::kDuplicateEntity);
  EXPECT_EQ(enforce_unique(std::vector<Mention>{a}), UniqueVerdict::kInsufficientEntities);
  EXPECT_EQ(enforce_unique(std::vector<Mention>{}), UniqueVerdict::kInsufficientEntities);
}

std::vector<oracle::Match> grouped(const std::vector<Mention>& ms) {
  std::vector<oracle::Match> out;
  for (const auto& m : ms) {
    if (out.empty() || out.back().start != m.start) out.push_back({m.start, m.end, {}});
    EXPECT_EQ(out.back().end, m.end);
    out.back().owners.push_back(to_index(m.entity));
  }
  for (auto& m : out) std::sort(m.owners.begin(), m.owners.end());
  return out;
}

TEST(FindMentions, MatchesNaiveScanOracleOnRandomInstances) {
  std::mt19937_64 rng(2024);
  std::size_t total_matches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = instances::random_matcher_instance(rng);
    ASSERT_EQ(text::normalize(inst.text), inst.text);
    const auto index = MentionIndex::build(inst.entities);
    const auto ms = find_mentions(index, inst.text);
    const auto expected = oracle::naive_scan(inst.text, inst.forms);
    ASSERT_EQ(grouped(ms), expected) << "trial " << trial << " text '" << inst.text << "'";
    for (const auto& m : ms) ASSERT_EQ(slice(inst.text, m), m.form);
    total_matches += expected.size();
  }
  EXPECT_GT(total_matches, 1000u);
}

TEST(FindMentions, BatchKernelMatchesSerialReference) {
  std::mt19937_64 rng(8);
  const auto inst = instances::random_matcher_instance(rng);
  const auto index = MentionIndex::build(inst.entities);
  std::vector<RawSentence> sentences;
  for (int i = 0; i < 500; ++i) sentences.push_back({"s" + std::to_string(i), instances::random_matcher_instance(rng).text});
  EXPECT_EQ(find_mentions_batch_serial(index, sentences), find_mentions_batch(index, sentences, 4));
}

}  // namespace
}  // namespace bagforge
