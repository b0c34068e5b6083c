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

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "bagforge/error.hpp"
#include "bagforge/parallel.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

namespace {

CharSpan span_of(const Mention& m) { return {m.start, m.end}; }

}  // namespace

std::vector<SentenceGroupMatch> link_positives(const MatchedSentence& sentence,
                                               const GroupIndex& index) {
  std::vector<SentenceGroupMatch> out;
  const auto& ms = sentence.mentions;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (std::size_t j = 0; j < ms.size(); ++j) {
      if (i == j || ms[i].entity == ms[j].entity) continue;
      // Entities sharing one surface form sit on the same span.
      if (span_of(ms[i]).overlaps(span_of(ms[j]))) continue;
      const Group g{ms[i].entity, ms[j].entity};
      if (!index.is_positive(g)) continue;
      out.push_back({sentence.sid, g, Polarity::kPositive, span_of(ms[i]),
                     span_of(ms[j])});
    }
  }
  return out;
}

std::optional<SentenceGroupMatch> sample_negative(
    const SentenceGroupMatch& positive, const MatchedSentence& sentence,
    const GroupIndex& index, const std::set<Group>& already_emitted, Rng& rng) {
  const bool replace_head = std::bernoulli_distribution(0.5)(rng);
  const EntityId h = positive.group.head;
  const EntityId t = positive.group.tail;
  const CharSpan kept_span = replace_head ? positive.tail_span : positive.head_span;

  std::vector<const Mention*> candidates;
  for (const auto& m : sentence.mentions) {
    if (m.entity == h || m.entity == t) continue;
    if (span_of(m).overlaps(kept_span)) continue;
    const Group g = replace_head ? Group{m.entity, t} : Group{h, m.entity};
    if (index.is_positive(g) || already_emitted.contains(g)) continue;
    if (std::any_of(candidates.begin(), candidates.end(),
                    [&](const Mention* c) { return c->entity == m.entity; })) {
      continue;
    }
    candidates.push_back(&m);
  }
  if (candidates.empty()) return std::nullopt;

  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const Mention& e = *candidates[pick(rng)];
  SentenceGroupMatch neg;
  neg.sid = sentence.sid;
  neg.polarity = Polarity::kNegative;
  if (replace_head) {
    neg.group = {e.entity, t};
    neg.head_span = span_of(e);
    neg.tail_span = positive.tail_span;
  } else {
    neg.group = {h, e.entity};
    neg.head_span = positive.head_span;
    neg.tail_span = span_of(e);
  }
  return neg;
}

std::vector<SentenceGroupMatch> link_sentence(const MatchedSentence& sentence,
                                              const GroupIndex& index,
                                              std::uint64_t seed) {
  auto out = link_positives(sentence, index);
  if (out.empty()) return out;
  Rng rng(text::derive_seed(seed, sentence.sid));
  std::set<Group> emitted;
  const std::size_t n_pos = out.size();
  for (std::size_t i = 0; i < n_pos; ++i) {
    if (auto neg = sample_negative(out[i], sentence, index, emitted, rng)) {
      emitted.insert(neg->group);
      out.push_back(*std::move(neg));
    }
  }
  return out;
}

std::vector<SentenceGroupMatch> link_corpus_serial(
    std::span<const MatchedSentence> sentences, const GroupIndex& index,
    std::uint64_t seed) {
  std::vector<SentenceGroupMatch> out;
  for (const auto& s : sentences) {
    auto linked = link_sentence(s, index, seed);
    out.insert(out.end(), std::make_move_iterator(linked.begin()),
               std::make_move_iterator(linked.end()));
  }
  return out;
}

std::vector<SentenceGroupMatch> link_corpus(
    std::span<const MatchedSentence> sentences, const GroupIndex& index,
    std::uint64_t seed, int workers) {
  std::vector<std::vector<SentenceGroupMatch>> per_sentence(sentences.size());
  const auto n = static_cast<std::int64_t>(sentences.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    per_sentence[k] = link_sentence(sentences[k], index, seed);
  }
  std::vector<SentenceGroupMatch> out;
  for (auto& v : per_sentence) {
    out.insert(out.end(), std::make_move_iterator(v.begin()),
               std::make_move_iterator(v.end()));
  }
  return out;
}

nlohmann::json ConstraintSummary::to_json() const {
  return {{"relation_types", relation_types},
          {"classes_with_na", relation_types + 1},
          {"positive_groups", positive_groups},
          {"negative_groups", negative_groups},
          {"negatives_requested", negatives_requested},
          {"negatives_available", negatives_available},
          {"dropped_relations", dropped_relations}};
}

ConstrainedMatches apply_constraints(
    std::span<const SentenceGroupMatch> matches, const GroupIndex& index,
    const RelationVocab& vocab, const ConstraintConfig& config, Rng& rng) {
  if (config.min_group > config.max_group) {
    throw Error(Errc::kInvalidConfig, "min_group > max_group");
  }
  if (!(config.neg_to_pos_ratio >= 0.0) ||
      !std::isfinite(config.neg_to_pos_ratio)) {
    throw Error(Errc::kInvalidConfig, "neg_to_pos_ratio must be >= 0");
  }

  std::set<Group> pos_groups;
  for (const auto& m : matches) {
    if (m.polarity == Polarity::kPositive) {
      pos_groups.insert(m.group);
    } else if (index.is_positive(m.group)) {
      throw Error(Errc::kInvalidConfig, "negative match for a G+ group");
    }
  }

  std::vector<std::size_t> support(vocab.size(), 0);
  for (const auto& g : pos_groups) {
    for (RelationId r : index.relations(g)) ++support[to_index(r)];
  }

  ConstrainedMatches result;
  std::vector<RelationId> remap(vocab.size(), kNA);
  for (std::uint32_t r = 1; r < vocab.size(); ++r) {
    if (support[r] >= config.min_group && support[r] <= config.max_group) {
      remap[r] = result.vocab.add(vocab.name(RelationId{r}));
    } else {
      result.summary.dropped_relations.push_back(vocab.name(RelationId{r}));
    }
  }

  std::set<Group> kept_pos;
  for (const auto& g : pos_groups) {
    std::vector<RelationId> rels;
    for (RelationId r : index.relations(g)) {
      if (remap[to_index(r)] != kNA) rels.push_back(remap[to_index(r)]);
    }
    if (rels.empty()) continue;
    std::sort(rels.begin(), rels.end());
    kept_pos.insert(g);
    result.group_relations.emplace_back(g, std::move(rels));
  }

  // Negatives only ride on sentences that still carry a positive match.
  std::unordered_set<std::string> positive_sids;
  for (const auto& m : matches) {
    if (m.polarity == Polarity::kPositive && kept_pos.contains(m.group)) {
      positive_sids.insert(m.sid);
    }
  }
  std::set<Group> neg_groups;
  for (const auto& m : matches) {
    if (m.polarity == Polarity::kNegative && positive_sids.contains(m.sid)) {
      neg_groups.insert(m.group);
    }
  }

  const auto requested = static_cast<std::size_t>(std::llround(
      config.neg_to_pos_ratio * static_cast<double>(kept_pos.size())));
  std::vector<Group> negs(neg_groups.begin(), neg_groups.end());
  std::shuffle(negs.begin(), negs.end(), rng);
  if (negs.size() > requested) negs.resize(requested);
  const std::set<Group> kept_neg(negs.begin(), negs.end());

  for (const auto& m : matches) {
    const bool keep = m.polarity == Polarity::kPositive
                          ? kept_pos.contains(m.group)
                          : kept_neg.contains(m.group) &&
                                positive_sids.contains(m.sid);
    if (keep) result.matches.push_back(m);
  }

  result.summary.relation_types = result.vocab.size() - 1;
  result.summary.positive_groups = kept_pos.size();
  result.summary.negative_groups = kept_neg.size();
  result.summary.negatives_requested = requested;
  result.summary.negatives_available = neg_groups.size();
  return result;
}

}  // namespace bagforge
