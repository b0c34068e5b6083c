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

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "bagforge/bag_builder.hpp"
#include "bagforge/kb_store.hpp"

namespace bagforge {

inline constexpr std::size_t kDefaultKs[] = {100, 200, 300, 2000, 4000, 6000};

struct Candidate {
  Triple triple;
  double score = 0.0;
};

struct PrPoint {
  std::size_t rank = 0;  // 1-based
  double precision = 0.0;
  double recall = 0.0;
};

struct PrecisionAtK {
  std::size_t k = 0;
  double precision = 0.0;
  bool truncated = false;  // k exceeded the candidate count
};

struct EvalReport {
  std::vector<PrPoint> curve;
  double auc = 0.0;  // average precision
  double max_f1 = 0.0;
  std::vector<PrecisionAtK> p_at_k;
  std::size_t candidates = 0;
  std::size_t gold = 0;
  std::size_t gold_found = 0;

  nlohmann::json to_json() const;  // without the curve
};

// Every group x every non-NA relation; duplicate groups count once.
// Throws kEmptyTestSet.
std::vector<Triple> build_candidates(std::span<const Group> groups,
                                     std::size_t relation_count);

// Descending score, ties by (head, rel, tail) ids ascending.
void rank_candidates(std::vector<Candidate>& candidates);

// Throws kUnknownGoldGroup when a gold triple's group has no candidate,
// kEmptyTestSet when there is nothing to rank or no gold.
EvalReport evaluate(std::span<const Candidate> candidates,
                    std::span<const Triple> gold,
                    std::span<const std::size_t> ks = kDefaultKs);

// Candidate scores from per-bag probabilities. A group's score for r is the
// max over its bags. Under exprels a uniform bag reads the class matching
// its orientation, a mixed bag sums both directions.
std::vector<Candidate> score_candidates(std::span<const Bag> bags,
                                        std::span<const std::vector<double>> probs,
                                        std::size_t base_relations,
                                        TaggingScheme scheme);

std::vector<Triple> gold_triples(std::span<const Bag> bags);

}  // namespace bagforge
