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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bagforge/group_linker.hpp"
#include "bagforge/tagging.hpp"

namespace bagforge {

enum class Composition { kUniform, kMix };

std::string_view composition_name(Composition c);

// Supporting sentences for one (group, label) instance before sampling.
// `relation` is the base relation (NA for negatives); `label` is the class
// the model is trained on (expanded under exprels).
struct BagInstance {
  Group group;
  RelationId relation = kNA;
  RelationId label = kNA;
  std::vector<TaggedSentencePtr> pool;
};

struct Bag {
  Group group;
  RelationId relation = kNA;
  RelationId label = kNA;
  Composition composition = Composition::kUniform;
  std::vector<TaggedSentencePtr> sentences;  // exactly bag_size
};

using GroupRelations = std::map<Group, std::vector<RelationId>>;

struct InstanceOptions {
  TaggingScheme scheme = TaggingScheme::kKTag;
  // S-tag only: one bag per surface orientation so "$" marks the same
  // entity throughout. K-tag bags are uniform regardless.
  bool uniform_bags = true;
  // Base vocabulary size including NA; required under exprels.
  std::size_t relation_count = 0;
};

// A group with k relations yields k instances sharing one pool; negative
// groups yield one NA instance. Instances come back sorted by
// (group, relation, label).
std::vector<BagInstance> build_instances(
    std::span<const TaggedSentencePtr> tagged,
    const GroupRelations& group_relations, const InstanceOptions& options);

Composition composition_of(std::span<const TaggedSentencePtr> sentences);

// Over/under-samples the pool to exactly bag_size: without replacement when
// the pool is larger, every sentence once plus uniform draws with
// replacement when it is smaller. Throws kEmptyBag.
Bag compose_bag(const BagInstance& instance, std::size_t bag_size, Rng& rng);

// Per-instance random streams derived from (seed, instance key).
std::vector<Bag> compose_bags(std::span<const BagInstance> instances,
                              std::size_t bag_size, std::uint64_t seed,
                              int workers = 1);

std::string instance_key(const Group& g, RelationId relation, RelationId label);

struct SplitFractions {
  double test = 0.20;
  double valid_of_remainder = 0.10;
};

struct SplitCounts {
  std::size_t bags = 0;
  std::size_t triples = 0;
  std::size_t triples_without_na = 0;
  std::size_t groups = 0;
  std::size_t sentences_sampled = 0;
  std::size_t pruned_bags = 0;
  nlohmann::json to_json() const;
};

struct DatasetSplits {
  std::vector<Bag> train;
  std::vector<Bag> valid;
  std::vector<Bag> test;
  std::uint64_t seed = 0;
  SplitFractions fractions;
  SplitCounts train_counts;
  SplitCounts valid_counts;
  SplitCounts test_counts;
  // Facts drawn per split before sentence pruning.
  std::size_t assigned_train = 0;
  std::size_t assigned_valid = 0;
  std::size_t assigned_test = 0;

  nlohmann::json manifest() const;
};

// Fact-level split. Facts of one unordered entity pair are drawn together
// so inverse facts share a split; targets are round(test * n) and
// round(valid_of_remainder * (n - n_test)) facts. Held-out bags lose any
// sentence id that occurs in a training bag and are re-composed; bags left
// empty are dropped. Throws kInvalidConfig for fractions outside (0, 1).
DatasetSplits split_dataset(std::vector<Bag> bags, const SplitFractions& fractions,
                            std::uint64_t seed);

}  // namespace bagforge
