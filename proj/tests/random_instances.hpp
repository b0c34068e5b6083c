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

// Random instances for the matcher and metric oracle comparisons.
#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bagforge/evaluator.hpp"
#include "bagforge/kb_store.hpp"
#include "oracles.hpp"

namespace instances {

using namespace bagforge;

// Random dictionaries over a tiny alphabet so forms overlap, nest and share
// prefixes; texts are already normalised.
struct MatcherInstance {
  std::map<std::string, std::set<std::uint32_t>> forms;
  EntitySet entities;
  std::string text;
};

inline MatcherInstance random_matcher_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_forms(1, 40), word_len(1, 3), n_words(1, 3), letter(0, 2),
      text_words(0, 30), sep(0, 9), owners(1, 3);
  const auto word = [&] {
    std::string w;
    for (int i = word_len(rng); i > 0; --i) w += static_cast<char>('a' + letter(rng));
    return w;
  };
  MatcherInstance inst;
  const int n_entities = n_forms(rng);
  std::vector<std::vector<std::string>> per_entity(static_cast<std::size_t>(n_entities));
  for (int f = n_forms(rng); f > 0; --f) {
    std::string form = word();
    for (int k = n_words(rng) - 1; k > 0; --k) form += (sep(rng) == 0 ? "-" : " ") + word();
    std::uniform_int_distribution<int> who(0, n_entities - 1);
    for (int o = owners(rng); o > 0; --o) {
      const int e = who(rng);
      auto& list = per_entity[static_cast<std::size_t>(e)];
      if (std::find(list.begin(), list.end(), form) == list.end()) list.push_back(form);
      inst.forms[form].insert(static_cast<std::uint32_t>(e));
    }
  }
  for (int e = 0; e < n_entities; ++e) {
    // Every entity needs a form; this one never occurs in generated text.
    const std::string own = "z" + std::to_string(e);
    per_entity[static_cast<std::size_t>(e)].push_back(own);
    inst.forms[own].insert(static_cast<std::uint32_t>(e));
    inst.entities.add({"C" + std::to_string(e), per_entity[static_cast<std::size_t>(e)]});
  }
  for (int w = text_words(rng); w > 0; --w) {
    if (!inst.text.empty()) {
      const int s = sep(rng);
      inst.text += s == 0 ? "-" : s == 1 ? ", " : " ";
    }
    inst.text += word();
  }
  return inst;
}

inline Triple triple(std::uint32_t h, std::uint32_t r, std::uint32_t t) {
  return {EntityId{h}, RelationId{r}, EntityId{t}};
}

// At most 100 candidates; coarse instances use five score levels so ties
// are common.
struct MetricInstance {
  std::vector<Candidate> cands;  // shuffled
  std::vector<Triple> gold;
  std::vector<oracle::Scored> scored;
  std::set<oracle::Key> gold_keys;
};

inline MetricInstance random_metric_instance(std::mt19937_64& rng, bool coarse) {
  std::uniform_int_distribution<std::uint32_t> n_groups(1, 20), n_rel(2, 6);
  const std::uint32_t G = n_groups(rng), R = n_rel(rng);
  std::uniform_int_distribution<int> level(0, 4);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  std::bernoulli_distribution is_gold(0.25);
  MetricInstance m;
  for (std::uint32_t g = 0; g < G; ++g) {
    const std::uint32_t h = g * 3 % 29, t = 30 + g;
    for (std::uint32_t r = 1; r < R && m.cands.size() < 100; ++r) {
      const double s = coarse ? level(rng) / 4.0 : fine(rng);
      m.cands.push_back({triple(h, r, t), s});
      m.scored.push_back({{h, r, t}, s});
      if (is_gold(rng)) {
        m.gold.push_back(triple(h, r, t));
        m.gold_keys.insert({h, r, t});
      }
    }
  }
  if (m.gold.empty()) {
    const auto& k = m.cands.front().triple;
    m.gold.push_back(k);
    m.gold_keys.insert({to_index(k.head), to_index(k.rel), to_index(k.tail)});
  }
  std::shuffle(m.cands.begin(), m.cands.end(), rng);
  return m;
}

}  // namespace instances
