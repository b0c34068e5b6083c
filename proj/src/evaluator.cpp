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

#include "bagforge/evaluator.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "bagforge/error.hpp"

namespace bagforge {

nlohmann::json EvalReport::to_json() const {
  nlohmann::json pk = nlohmann::json::array();
  for (const auto& p : p_at_k) {
    pk.push_back({{"k", p.k}, {"precision", p.precision}, {"truncated", p.truncated}});
  }
  return {{"auc", auc},
          {"max_f1", max_f1},
          {"p_at_k", pk},
          {"candidates", candidates},
          {"gold", gold},
          {"gold_found", gold_found}};
}

std::vector<Triple> build_candidates(std::span<const Group> groups,
                                     std::size_t relation_count) {
  const std::set<Group> unique(groups.begin(), groups.end());
  if (unique.empty()) throw Error(Errc::kEmptyTestSet, "no test groups");
  std::vector<Triple> out;
  out.reserve(unique.size() * (relation_count > 0 ? relation_count - 1 : 0));
  for (const Group& g : unique) {
    for (std::uint32_t r = 1; r < relation_count; ++r) {
      out.push_back({g.head, RelationId{r}, g.tail});
    }
  }
  return out;
}

void rank_candidates(std::vector<Candidate>& candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.triple < b.triple;
            });
}

EvalReport evaluate(std::span<const Candidate> candidates,
                    std::span<const Triple> gold, std::span<const std::size_t> ks) {
  if (candidates.empty()) throw Error(Errc::kEmptyTestSet, "no candidates to rank");
  const std::set<Triple> gold_set(gold.begin(), gold.end());
  if (gold_set.empty()) throw Error(Errc::kEmptyTestSet, "no gold triples");

  std::set<Group> groups;
  std::set<Triple> seen;
  for (const auto& c : candidates) {
    if (!seen.insert(c.triple).second) {
      throw Error(Errc::kMalformedInput, "duplicate candidate triple");
    }
    groups.insert(c.triple.group());
  }
  for (const auto& t : gold_set) {
    if (!groups.contains(t.group())) {
      throw Error(Errc::kUnknownGoldGroup,
                  "gold triple group (" + std::to_string(to_index(t.head)) + ", " +
                      std::to_string(to_index(t.tail)) + ") is not a test group");
    }
  }

  std::vector<Candidate> ranked(candidates.begin(), candidates.end());
  rank_candidates(ranked);

  EvalReport report;
  report.candidates = ranked.size();
  report.gold = gold_set.size();
  const double n_gold = static_cast<double>(gold_set.size());
  std::size_t hits = 0;
  double ap = 0.0;
  std::vector<std::size_t> hits_at(ranked.size() + 1, 0);
  report.curve.reserve(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const std::size_t rank = i + 1;
    const bool hit = gold_set.contains(ranked[i].triple);
    if (hit) ++hits;
    hits_at[rank] = hits;
    const double precision = static_cast<double>(hits) / static_cast<double>(rank);
    const double recall = static_cast<double>(hits) / n_gold;
    if (hit) ap += precision;
    if (precision + recall > 0.0) {
      report.max_f1 = std::max(report.max_f1, 2.0 * precision * recall / (precision + recall));
    }
    report.curve.push_back({rank, precision, recall});
  }
  report.auc = ap / n_gold;
  report.gold_found = hits;
  for (std::size_t k : ks) {
    PrecisionAtK p;
    p.k = k;
    const std::size_t upto = std::min(k, ranked.size());
    p.truncated = k > ranked.size();
    p.precision = upto == 0 ? 0.0
                            : static_cast<double>(hits_at[upto]) / static_cast<double>(upto);
    report.p_at_k.push_back(p);
  }
  return report;
}

std::vector<Candidate> score_candidates(std::span<const Bag> bags,
                                        std::span<const std::vector<double>> probs,
                                        std::size_t base_relations,
                                        TaggingScheme scheme) {
  if (bags.size() != probs.size()) {
    throw Error(Errc::kOutOfBounds, "one probability vector per bag required");
  }
  const bool exprels = scheme == TaggingScheme::kSTagExpRels;
  const LabelMapper mapper(base_relations);
  const std::size_t classes = exprels ? mapper.expanded_size() : base_relations;
  std::map<Group, std::vector<double>> scores;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    const auto& p = probs[b];
    if (p.size() != classes) {
      throw Error(Errc::kOutOfBounds, "probability vector has " + std::to_string(p.size()) +
                                          " classes, expected " + std::to_string(classes));
    }
    auto [it, fresh] = scores.try_emplace(bags[b].group, base_relations, -1.0);
    auto& s = it->second;
    for (std::uint32_t r = 1; r < base_relations; ++r) {
      const RelationId rel{r};
      double v = p[r];
      if (exprels) {
        const double fwd = p[to_index(mapper.expand(rel, true))];
        const double bwd = p[to_index(mapper.expand(rel, false))];
        if (bags[b].composition == Composition::kUniform && !bags[b].sentences.empty()) {
          v = bags[b].sentences.front()->e1_is_head ? fwd : bwd;
        } else {
          v = fwd + bwd;
        }
      }
      s[r] = std::max(s[r], v);
    }
  }
  std::vector<Candidate> out;
  out.reserve(scores.size() * (base_relations - 1));
  for (const auto& [g, s] : scores) {
    for (std::uint32_t r = 1; r < base_relations; ++r) {
      out.push_back({{g.head, RelationId{r}, g.tail}, s[r]});
    }
  }
  return out;
}

std::vector<Triple> gold_triples(std::span<const Bag> bags) {
  std::set<Triple> gold;
  for (const auto& b : bags) {
    if (b.relation != kNA) gold.insert({b.group.head, b.relation, b.group.tail});
  }
  return {gold.begin(), gold.end()};
}

}  // namespace bagforge
