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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bagforge/corpus_ingest.hpp"
#include "bagforge/kb_store.hpp"

namespace bagforge {

// Half-open [start, end) over Unicode scalar values of normalised text.
struct Mention {
  EntityId entity{};
  std::size_t start = 0;
  std::size_t end = 0;
  std::string form;
  bool operator==(const Mention&) const = default;
};

// Character trie over normalised surface forms. Accepting nodes carry the
// sorted set of entities sharing the form. Immutable after build.
class MentionIndex {
 public:
  static MentionIndex build(const EntitySet& entities);

  // Owners of an exact (normalised) form; empty if not indexed.
  std::span<const EntityId> lookup(std::u32string_view form) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t form_count() const { return owners_.size(); }

  // Longest indexed form starting at text[pos] that ends on a word
  // boundary. Returns the match length (0 if none) and its owner slot.
  std::size_t longest_at(std::u32string_view text, std::size_t pos,
                         std::int32_t* owner_slot) const;

  std::span<const EntityId> owners(std::int32_t slot) const {
    return owners_[static_cast<std::size_t>(slot)];
  }

 private:
  struct Node {
    // Sorted by code point.
    std::vector<std::pair<char32_t, std::uint32_t>> children;
    std::int32_t owner_slot = -1;
  };

  std::uint32_t child(std::uint32_t node, char32_t c) const;

  std::vector<Node> nodes_;
  std::vector<std::vector<EntityId>> owners_;
};

// Leftmost-longest non-overlapping matches on word boundaries, sorted by
// start. A form owned by several entities yields one Mention per entity at
// the same span. `text` must be normalised.
std::vector<Mention> find_mentions(const MentionIndex& index,
                                   std::string_view text);

// Serial reference for the batch kernel.
std::vector<std::vector<Mention>> find_mentions_batch_serial(
    const MentionIndex& index, std::span<const RawSentence> sentences);
// OpenMP kernel; output identical to the serial reference.
std::vector<std::vector<Mention>> find_mentions_batch(
    const MentionIndex& index, std::span<const RawSentence> sentences,
    int workers);

enum class UniqueVerdict { kKeep, kDuplicateEntity, kInsufficientEntities };

std::string_view verdict_name(UniqueVerdict v);

// Rejects sentences where an entity is mentioned more than once or where
// fewer than two distinct entities were matched.
UniqueVerdict enforce_unique(std::span<const Mention> mentions);

}  // namespace bagforge
