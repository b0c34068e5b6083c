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

#include "bagforge/bag_builder.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_set>

#include "bagforge/error.hpp"
#include "bagforge/parallel.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

std::string_view composition_name(Composition c) {
  return c == Composition::kUniform ? "uniform" : "mix";
}

std::string instance_key(const Group& g, RelationId relation,
                         RelationId label) {
  return std::to_string(to_index(g.head)) + "|" +
         std::to_string(to_index(relation)) + "|" +
         std::to_string(to_index(g.tail)) + "|" +
         std::to_string(to_index(label));
}

std::vector<BagInstance> build_instances(
    std::span<const TaggedSentencePtr> tagged,
    const GroupRelations& group_relations, const InstanceOptions& options) {
  const bool stag = options.scheme != TaggingScheme::kKTag;
  const bool exprels = options.scheme == TaggingScheme::kSTagExpRels;
  const bool by_orientation = stag && options.uniform_bags;
  if (exprels && options.relation_count == 0) {
    throw Error(Errc::kInvalidConfig, "exprels needs the relation vocabulary size");
  }
  const LabelMapper mapper(exprels ? options.relation_count : 0);

  // (group, relation, label, orientation) -> instance
  using Key = std::tuple<Group, RelationId, RelationId, int>;
  std::map<Key, BagInstance> instances;
  const auto add = [&](const TaggedSentencePtr& s, RelationId rel) {
    const RelationId label = exprels ? mapper.expand(rel, s->e1_is_head) : rel;
    const int orientation = by_orientation ? (s->e1_is_head ? 1 : 0) : -1;
    auto& inst = instances[Key{s->group, rel, label, orientation}];
    inst.group = s->group;
    inst.relation = rel;
    inst.label = label;
    inst.pool.push_back(s);
  };

  for (const auto& s : tagged) {
    if (s->polarity == Polarity::kNegative) {
      add(s, kNA);
      continue;
    }
    auto it = group_relations.find(s->group);
    if (it == group_relations.end()) continue;
    for (RelationId r : it->second) add(s, r);
  }

  std::vector<BagInstance> out;
  out.reserve(instances.size());
  for (auto& [key, inst] : instances) out.push_back(std::move(inst));
  return out;
}

Composition composition_of(std::span<const TaggedSentencePtr> sentences) {
  if (sentences.empty()) return Composition::kUniform;
  const EntityId first = sentences.front()->dollar_entity();
  for (const auto& s : sentences) {
    if (s->dollar_entity() != first) return Composition::kMix;
  }
  return Composition::kUniform;
}

Bag compose_bag(const BagInstance& instance, std::size_t bag_size, Rng& rng) {
  if (instance.pool.empty()) {
    throw Error(Errc::kEmptyBag, "no supporting sentences for instance");
  }
  if (bag_size == 0) throw Error(Errc::kInvalidConfig, "bag_size must be >= 1");

  Bag bag;
  bag.group = instance.group;
  bag.relation = instance.relation;
  bag.label = instance.label;
  const auto& pool = instance.pool;
  if (pool.size() >= bag_size) {
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(bag_size);
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) bag.sentences.push_back(pool[i]);
  } else {
    bag.sentences = pool;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    while (bag.sentences.size() < bag_size) {
      bag.sentences.push_back(pool[pick(rng)]);
    }
  }
  bag.composition = composition_of(bag.sentences);
  return bag;
}

std::vector<Bag> compose_bags(std::span<const BagInstance> instances,
                              std::size_t bag_size, std::uint64_t seed,
                              int workers) {
  std::vector<Bag> bags(instances.size());
  const auto n = static_cast<std::int64_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& inst = instances[static_cast<std::size_t>(i)];
    Rng rng(text::derive_seed(
        seed, instance_key(inst.group, inst.relation, inst.label)));
    bags[static_cast<std::size_t>(i)] = compose_bag(inst, bag_size, rng);
  }
  return bags;
}

nlohmann::json SplitCounts::to_json() const {
  return {{"bags", bags},
          {"triples", triples},
          {"triples_without_na", triples_without_na},
          {"groups", groups},
          {"sentences_sampled", sentences_sampled},
          {"pruned_bags", pruned_bags}};
}

nlohmann::json DatasetSplits::manifest() const {
  return {{"seed", seed},
          {"fractions",
           {{"test", fractions.test},
            {"valid_of_remainder", fractions.valid_of_remainder}}},
          {"assigned_triples",
           {{"train", assigned_train},
            {"valid", assigned_valid},
            {"test", assigned_test}}},
          {"counts",
           {{"train", train_counts.to_json()},
            {"valid", valid_counts.to_json()},
            {"test", test_counts.to_json()}}}};
}

namespace {

std::vector<TaggedSentencePtr> distinct_sentences(const Bag& bag) {
  std::vector<TaggedSentencePtr> out;
  std::unordered_set<const TaggedSentence*> seen;
  for (const auto& s : bag.sentences) {
    if (seen.insert(s.get()).second) out.push_back(s);
  }
  return out;
}

SplitCounts count(const std::vector<Bag>& bags) {
  SplitCounts c;
  std::set<Triple> triples;
  std::set<Group> groups;
  for (const auto& b : bags) {
    triples.insert({b.group.head, b.relation, b.group.tail});
    groups.insert(b.group);
    c.sentences_sampled += b.sentences.size();
  }
  c.bags = bags.size();
  c.triples = triples.size();
  c.triples_without_na = static_cast<std::size_t>(std::count_if(
      triples.begin(), triples.end(),
      [](const Triple& t) { return t.rel != kNA; }));
  c.groups = groups.size();
  return c;
}

}  // namespace

DatasetSplits split_dataset(std::vector<Bag> bags,
                            const SplitFractions& fractions,
                            std::uint64_t seed) {
  const auto valid_fraction = [](double f) { return f > 0.0 && f < 1.0; };
  if (!valid_fraction(fractions.test) ||
      !valid_fraction(fractions.valid_of_remainder)) {
    throw Error(Errc::kInvalidConfig, "split fractions must lie in (0, 1)");
  }

  // Unordered pair -> facts on it.
  using Unit = std::pair<EntityId, EntityId>;
  std::map<Unit, std::set<Triple>> units;
  for (const auto& b : bags) {
    const Unit u = std::minmax(b.group.head, b.group.tail);
    units[u].insert({b.group.head, b.relation, b.group.tail});
  }
  std::size_t n_facts = 0;
  for (const auto& [u, facts] : units) n_facts += facts.size();

  const auto n_test = static_cast<std::size_t>(
      std::llround(fractions.test * static_cast<double>(n_facts)));
  const auto n_valid = static_cast<std::size_t>(std::llround(
      fractions.valid_of_remainder * static_cast<double>(n_facts - n_test)));

  std::vector<Unit> order;
  order.reserve(units.size());
  for (const auto& [u, facts] : units) order.push_back(u);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  enum class Part { kTrain, kValid, kTest };
  std::map<Unit, Part> assignment;
  DatasetSplits out;
  out.seed = seed;
  out.fractions = fractions;
  for (const auto& u : order) {
    const std::size_t k = units[u].size();
    if (out.assigned_test < n_test) {
      assignment[u] = Part::kTest;
      out.assigned_test += k;
    } else if (out.assigned_valid < n_valid) {
      assignment[u] = Part::kValid;
      out.assigned_valid += k;
    } else {
      assignment[u] = Part::kTrain;
      out.assigned_train += k;
    }
  }

  std::vector<Bag> held_valid;
  std::vector<Bag> held_test;
  for (auto& b : bags) {
    switch (assignment[std::minmax(b.group.head, b.group.tail)]) {
      case Part::kTrain: out.train.push_back(std::move(b)); break;
      case Part::kValid: held_valid.push_back(std::move(b)); break;
      case Part::kTest: held_test.push_back(std::move(b)); break;
    }
  }

  std::unordered_set<std::string> train_sids;
  for (const auto& b : out.train) {
    for (const auto& s : b.sentences) train_sids.insert(s->sid);
  }

  const auto prune = [&](std::vector<Bag>& held, std::vector<Bag>& dest,
                         SplitCounts& counts) {
    std::size_t pruned = 0;
    for (auto& b : held) {
      const auto distinct = distinct_sentences(b);
      BagInstance rest{b.group, b.relation, b.label, {}};
      for (const auto& s : distinct) {
        if (!train_sids.contains(s->sid)) rest.pool.push_back(s);
      }
      if (rest.pool.size() == distinct.size()) {
        dest.push_back(std::move(b));
        continue;
      }
      ++pruned;
      if (rest.pool.empty()) continue;
      Rng bag_rng(text::derive_seed(
          seed, "prune|" + instance_key(b.group, b.relation, b.label)));
      dest.push_back(compose_bag(rest, b.sentences.size(), bag_rng));
    }
    counts = count(dest);
    counts.pruned_bags = pruned;
  };
  out.train_counts = count(out.train);
  prune(held_valid, out.valid, out.valid_counts);
  prune(held_test, out.test, out.test_counts);
  return out;
}

}  // namespace bagforge
