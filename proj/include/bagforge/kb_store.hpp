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
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace bagforge {

enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};

constexpr std::uint32_t to_index(EntityId id) {
  return static_cast<std::uint32_t>(id);
}
constexpr std::uint32_t to_index(RelationId id) {
  return static_cast<std::uint32_t>(id);
}

inline constexpr RelationId kNA{0};
inline constexpr std::string_view kNAName = "NA";

// An ordered entity pair (h, t). (A, B) and (B, A) are different groups.
struct Group {
  EntityId head{};
  EntityId tail{};
  auto operator<=>(const Group&) const = default;
};

struct GroupHasher {
  std::size_t operator()(const Group& g) const noexcept {
    return (static_cast<std::size_t>(to_index(g.head)) << 32) ^
           to_index(g.tail);
  }
};

struct Triple {
  EntityId head{};
  RelationId rel{};
  EntityId tail{};
  auto operator<=>(const Triple&) const = default;
  Group group() const { return {head, tail}; }
};

struct EntityRecord {
  std::string cui;
  std::vector<std::string> forms;  // normalised, unique, nonempty
};

class EntitySet {
 public:
  // Throws kMalformedInput on duplicate cui or empty form list.
  EntityId add(EntityRecord record);

  const EntityRecord& operator[](EntityId id) const {
    return records_[to_index(id)];
  }
  const std::string& cui(EntityId id) const { return records_[to_index(id)].cui; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<EntityRecord>& records() const { return records_; }

  // Throws kUnknownEntity.
  EntityId id_of(std::string_view cui) const;
  const EntityId* find(std::string_view cui) const;

 private:
  std::vector<EntityRecord> records_;
  std::unordered_map<std::string, EntityId> by_cui_;
};

// Index 0 is always NA.
class RelationVocab {
 public:
  RelationVocab();
  // Builds NA + names (NA itself is skipped if present in names).
  explicit RelationVocab(const std::vector<std::string>& names);

  RelationId add(std::string_view name);
  RelationId id_of(std::string_view name) const;  // throws kUnknownEntity
  const RelationId* find(std::string_view name) const;
  const std::string& name(RelationId id) const { return names_[to_index(id)]; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const RelationVocab& other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, RelationId> index_;
};

using RelationFilter = std::function<bool(std::string_view)>;

struct KnowledgeBase {
  EntitySet entities;
  std::vector<Triple> triples;  // sorted, deduplicated, rel != NA
  RelationVocab relations;
};

struct KbLoadStats {
  std::size_t lines = 0;
  std::size_t duplicates = 0;
  std::size_t filtered = 0;
};

// Entities: JSON Lines {"cui", "forms"}. Triples: head<TAB>relation<TAB>tail.
// The vocabulary is NA followed by the surviving relation names in sorted
// order, so the result does not depend on line order.
KnowledgeBase load_kb(const std::filesystem::path& triples_path,
                      const std::filesystem::path& entities_path,
                      const RelationFilter& filter = {},
                      KbLoadStats* stats = nullptr);

EntitySet load_entities(const std::filesystem::path& entities_path);

// Canonical serialisation (normalised entities, sorted triples, vocab).
void write_kb(const KnowledgeBase& kb, const std::filesystem::path& dir);

// Sorted relation ids per ordered pair; G+ is every key.
class GroupIndex {
 public:
  GroupIndex() = default;

  bool is_positive(const Group& g) const { return index_.contains(g); }
  // Empty span for groups outside G+.
  const std::vector<RelationId>& relations(const Group& g) const;
  const std::vector<Group>& positive_groups() const { return groups_; }
  std::size_t size() const { return groups_.size(); }

  // G- bookkeeping; throws kInvalidConfig if g is in G+.
  void mark_negative(const Group& g);
  bool is_negative(const Group& g) const { return negatives_.contains(g); }
  std::size_t negative_count() const { return negatives_.size(); }

  // Builder: groups are kept sorted for deterministic iteration.
  void add(const Triple& t);
  void finalize();

 private:
  std::unordered_map<Group, std::vector<RelationId>, GroupHasher> index_;
  std::vector<Group> groups_;
  std::unordered_set<Group, GroupHasher> negatives_;
};

GroupIndex build_group_index(const std::vector<Triple>& triples);

// Cartesian product of head forms x tail forms. Throws kSelfPair when
// head == tail and kMalformedInput for an entity without forms.
std::vector<std::pair<std::string, std::string>> textual_pairs(
    const Group& group, const EntitySet& entities);

}  // namespace bagforge
