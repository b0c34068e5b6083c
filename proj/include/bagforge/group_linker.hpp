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

#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bagforge/kb_store.hpp"
#include "bagforge/mention_matcher.hpp"

namespace bagforge {

enum class Polarity { kPositive, kNegative };

// Half-open character span.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  auto operator<=>(const CharSpan&) const = default;
  bool overlaps(const CharSpan& o) const {
    return begin < o.end && o.begin < end;
  }
};

struct SentenceGroupMatch {
  std::string sid;
  Group group;
  Polarity polarity = Polarity::kPositive;
  CharSpan head_span;
  CharSpan tail_span;
  bool operator==(const SentenceGroupMatch&) const = default;
};

// A sentence that passed enforce_unique, with its mentions.
struct MatchedSentence {
  std::string sid;
  std::string text;
  std::vector<Mention> mentions;
};

using Rng = std::mt19937_64;

// One positive match per ordered pair of distinct mentioned entities whose
// group is in G+. Pairs are enumerated in mention order.
std::vector<SentenceGroupMatch> link_positives(const MatchedSentence& sentence,
                                               const GroupIndex& index);

// Replaces the head (coin = heads, p = 1/2) or the tail of `positive` with
// another entity mentioned in the sentence, chosen uniformly among those
// whose resulting group is neither in G+ nor in `already_emitted`.
std::optional<SentenceGroupMatch> sample_negative(
    const SentenceGroupMatch& positive, const MatchedSentence& sentence,
    const GroupIndex& index, const std::set<Group>& already_emitted, Rng& rng);

// Positives then one negative attempt per positive, using a random stream
// derived from (seed, sid).
std::vector<SentenceGroupMatch> link_sentence(const MatchedSentence& sentence,
                                              const GroupIndex& index,
                                              std::uint64_t seed);

std::vector<SentenceGroupMatch> link_corpus_serial(
    std::span<const MatchedSentence> sentences, const GroupIndex& index,
    std::uint64_t seed);
std::vector<SentenceGroupMatch> link_corpus(
    std::span<const MatchedSentence> sentences, const GroupIndex& index,
    std::uint64_t seed, int workers);

struct ConstraintConfig {
  std::size_t min_group = 10;
  std::size_t max_group = 1500;
  double neg_to_pos_ratio = 0.7;
};

struct ConstraintSummary {
  std::size_t relation_types = 0;  // surviving, NA excluded
  std::size_t positive_groups = 0;
  std::size_t negative_groups = 0;
  std::size_t negatives_requested = 0;
  std::size_t negatives_available = 0;
  std::vector<std::string> dropped_relations;
  nlohmann::json to_json() const;
};

struct ConstrainedMatches {
  std::vector<SentenceGroupMatch> matches;  // input order preserved
  RelationVocab vocab;  // NA + surviving relations, in original order
  // Surviving relations per positive group, in `vocab` ids.
  std::vector<std::pair<Group, std::vector<RelationId>>> group_relations;
  ConstraintSummary summary;
};

// (a) keeps relations supported by [min_group, max_group] positive groups
// and drops groups left without a relation; (b) downsamples negative groups
// uniformly to round(ratio * |surviving positive groups|).
ConstrainedMatches apply_constraints(
    std::span<const SentenceGroupMatch> matches, const GroupIndex& index,
    const RelationVocab& vocab, const ConstraintConfig& config, Rng& rng);

}  // namespace bagforge
