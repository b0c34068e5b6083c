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

#include "bagforge/group_linker.hpp"

#include <gtest/gtest.h>

#include "bagforge/error.hpp"

namespace bagforge {
namespace {

constexpr EntityId A{0}, B{1}, C{2}, D{3};
constexpr RelationId R1{1}, R2{2};

MatchedSentence sentence(std::vector<EntityId> ents, std::string sid = "s1") {
  MatchedSentence s;
  s.sid = std::move(sid);
  std::size_t pos = 0;
  for (EntityId e : ents) {
    s.mentions.push_back({e, pos, pos + 3, "e" + std::to_string(to_index(e))});
    pos += 5;
  }
  return s;
}

SentenceGroupMatch positive(const MatchedSentence& s, EntityId h, EntityId t) {
  const auto pos = link_positives(s, build_group_index({{h, R1, t}}));
  EXPECT_EQ(pos.size(), 1u);
  return pos.at(0);
}

TEST(LinkPositives, OneMatchPerKbOrderedPair) {
  const auto s = sentence({A, B});
  const auto out = link_positives(s, build_group_index({{A, R1, B}}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].group, (Group{A, B}));
  EXPECT_EQ(out[0].head_span, (CharSpan{0, 3}));
  EXPECT_EQ(out[0].tail_span, (CharSpan{5, 8}));
  EXPECT_EQ(out[0].polarity, Polarity::kPositive);
}

TEST(LinkPositives, ExaminesAllOrderedPairs) {
  const auto s = sentence({A, B, C});
  const auto index = build_group_index(
      {{A, R1, B}, {B, R1, A}, {A, R1, C}, {C, R1, A}, {B, R1, C}, {C, R2, B}, {A, R2, B}});
  const auto out = link_positives(s, index);
  EXPECT_EQ(out.size(), 6u);
  EXPECT_TRUE(link_positives(s, build_group_index({{A, R1, D}})).empty());
}

TEST(SampleNegative, NoNovelEntityMeansNone) {
  const auto s = sentence({A, B});
  const auto index = build_group_index({{A, R1, B}});
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    EXPECT_FALSE(sample_negative(positive(s, A, B), s, index, {}, rng).has_value());
  }
}

TEST(SampleNegative, ReplacesTheCoinSideWithTheNovelEntity) {
  const auto s = sentence({A, B, C});
  const auto index = build_group_index({{A, R1, B}});
  const auto pos = positive(s, A, B);
  int heads = 0, tails = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto neg = sample_negative(pos, s, index, {}, rng);
    ASSERT_TRUE(neg.has_value());
    EXPECT_EQ(neg->polarity, Polarity::kNegative);
    if (neg->group == Group{C, B}) {
      ++heads;
      EXPECT_EQ(neg->head_span, (CharSpan{10, 13}));
      EXPECT_EQ(neg->tail_span, pos.tail_span);
    } else {
      ASSERT_EQ(neg->group, (Group{A, C}));
      ++tails;
      EXPECT_EQ(neg->tail_span, (CharSpan{10, 13}));
    }
  }
  EXPECT_GT(heads, 60);
  EXPECT_GT(tails, 60);
}

TEST(SampleNegative, RespectsOpenWorldConstraint) {
  const auto s = sentence({A, B, C});
  const auto index = build_group_index({{A, R1, B}, {C, R1, B}, {A, R1, C}});
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    EXPECT_FALSE(sample_negative(positive(s, A, B), s, index, {}, rng).has_value());
  }
}

TEST(SampleNegative, SkipsAlreadyEmittedGroups) {
  const auto s = sentence({A, B, C, D});
  const auto index = build_group_index({{A, R1, B}});
  const std::set<Group> emitted{{C, B}, {A, C}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto neg = sample_negative(positive(s, A, B), s, index, emitted, rng);
    ASSERT_TRUE(neg.has_value());
    EXPECT_TRUE(neg->group == (Group{D, B}) || neg->group == (Group{A, D}));
  }
}

TEST(LinkCorpus, NegativesReuseSentencesAndStayOutOfKb) {
  std::vector<MatchedSentence> corpus;
  std::vector<Triple> triples;
  for (std::uint32_t i = 0; i < 300; ++i) {
    const EntityId h{i % 40}, t{(i * 7 + 3) % 40}, e{(i * 13 + 5) % 40};
    if (h == t || h == e || t == e) continue;
    triples.push_back({h, R1, t});
    corpus.push_back(sentence({h, t, e}, "s" + std::to_string(i)));
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  const auto index = build_group_index(triples);
  const auto serial = link_corpus_serial(corpus, index, 11);
  EXPECT_EQ(serial, link_corpus(corpus, index, 11, 4));
  std::set<std::string> pos_sids;
  std::size_t negatives = 0;
  for (const auto& m : serial) {
    if (m.polarity == Polarity::kPositive) {
      EXPECT_TRUE(index.is_positive(m.group));
      pos_sids.insert(m.sid);
    }
  }
  for (const auto& m : serial) {
    if (m.polarity != Polarity::kNegative) continue;
    ++negatives;
    EXPECT_FALSE(index.is_positive(m.group));
    EXPECT_TRUE(pos_sids.contains(m.sid));
    EXPECT_FALSE(m.head_span.overlaps(m.tail_span));
  }
  EXPECT_GT(negatives, 50u);
  EXPECT_NE(serial, link_corpus_serial(corpus, index, 12));
}

// Positive groups spread over relations (each with `per_relation` groups),
// plus `negatives` distinct negative groups, one match each.
struct Synthetic {
  std::vector<SentenceGroupMatch> matches;
  GroupIndex index;
  RelationVocab vocab;
};

Synthetic synthetic(const std::vector<std::size_t>& per_relation, std::size_t negatives) {
  Synthetic s;
  std::vector<Triple> triples;
  std::uint32_t next = 0;
  std::size_t sid = 0;
  for (std::size_t r = 0; r < per_relation.size(); ++r) {
    const RelationId rel = s.vocab.add("rel_" + std::to_string(r));
    for (std::size_t k = 0; k < per_relation[r]; ++k) {
      const EntityId h{next++}, t{next++};
      triples.push_back({h, rel, t});
      const std::string id = "s" + std::to_string(sid++);
      s.matches.push_back({id, {h, t}, Polarity::kPositive, {0, 1}, {2, 3}});
      if (s.matches.size() <= 2 * negatives) {
        s.matches.push_back({id, {t, h}, Polarity::kNegative, {2, 3}, {0, 1}});
      }
    }
  }
  s.index = build_group_index(triples);
  return s;
}

TEST(ApplyConstraints, GroupSizeBoundsAreInclusive) {
  const auto s = synthetic({9, 10, 15, 16}, 0);
  Rng rng(1);
  const auto out = apply_constraints(s.matches, s.index, s.vocab, {10, 15, 0.7}, rng);
  EXPECT_EQ(out.summary.relation_types, 2u);
  EXPECT_EQ(out.summary.dropped_relations, (std::vector<std::string>{"rel_0", "rel_3"}));
  EXPECT_EQ(out.vocab.names(), (std::vector<std::string>{"NA", "rel_1", "rel_2"}));
  EXPECT_EQ(out.summary.positive_groups, 25u);
  for (const auto& [g, rels] : out.group_relations) {
    EXPECT_EQ(rels.size(), 1u);
    EXPECT_NE(rels[0], kNA);
  }
}

TEST(ApplyConstraints, DefaultBoundsKeepTenAndDropOutside) {
  const auto s = synthetic({9, 10, 1500, 1501}, 0);
  Rng rng(1);
  const auto out = apply_constraints(s.matches, s.index, s.vocab, {}, rng);
  EXPECT_EQ(out.vocab.names(), (std::vector<std::string>{"NA", "rel_1", "rel_2"}));
}

TEST(ApplyConstraints, NegativeRequestFollowsRatio) {
  // 92,070 positive groups at ratio 0.7 request 64,449 negatives.
  const auto s = synthetic(std::vector<std::size_t>(90, 1023), 80000);
  Rng rng(5);
  const auto out = apply_constraints(s.matches, s.index, s.vocab, {}, rng);
  EXPECT_EQ(out.summary.positive_groups, 92070u);
  EXPECT_EQ(out.summary.negatives_available, 80000u);
  EXPECT_EQ(out.summary.negatives_requested, 64449u);
  EXPECT_EQ(out.summary.negative_groups, 64449u);
  EXPECT_LE(out.summary.negatives_requested > 64448 ? out.summary.negatives_requested - 64448
                                                    : 64448 - out.summary.negatives_requested,
            1u);
  for (const auto& m : out.matches) {
    if (m.polarity == Polarity::kNegative) EXPECT_FALSE(s.index.is_positive(m.group));
  }
}

TEST(ApplyConstraints, FewerNegativesThanRequestedKeepsAll) {
  const auto s = synthetic({20}, 5);
  Rng rng(1);
  const auto out = apply_constraints(s.matches, s.index, s.vocab, {}, rng);
  EXPECT_EQ(out.summary.negatives_requested, 14u);
  EXPECT_EQ(out.summary.negative_groups, 5u);
}

TEST(ApplyConstraints, NegativesDropWithTheirSentencesPositives) {
  auto s = synthetic({9, 10}, 19);
  Rng rng(1);
  const auto out = apply_constraints(s.matches, s.index, s.vocab, {10, 1500, 10.0}, rng);
  // Only sentences whose positive survived (rel_1) may keep a negative.
  EXPECT_EQ(out.summary.negative_groups, 10u);
}

TEST(ApplyConstraints, DeterministicForSeed) {
  const auto s = synthetic({30, 40}, 60);
  Rng a(9), b(9), c(10);
  const auto x = apply_constraints(s.matches, s.index, s.vocab, {10, 1500, 0.5}, a);
  const auto y = apply_constraints(s.matches, s.index, s.vocab, {10, 1500, 0.5}, b);
  const auto z = apply_constraints(s.matches, s.index, s.vocab, {10, 1500, 0.5}, c);
  EXPECT_EQ(x.matches, y.matches);
  EXPECT_NE(x.matches, z.matches);
}

TEST(ApplyConstraints, RejectsInvalidConfigAndLeakedNegatives) {
  auto s = synthetic({10}, 0);
  Rng rng(1);
  EXPECT_THROW(apply_constraints(s.matches, s.index, s.vocab, {20, 10, 0.7}, rng), Error);
  EXPECT_THROW(apply_constraints(s.matches, s.index, s.vocab, {10, 20, -1.0}, rng), Error);
  s.matches.push_back(s.matches[0]);
  s.matches.back().polarity = Polarity::kNegative;
  EXPECT_THROW(apply_constraints(s.matches, s.index, s.vocab, {}, rng), Error);
}

}  // namespace
}  // namespace bagforge
