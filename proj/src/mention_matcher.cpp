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

#include "bagforge/mention_matcher.hpp"

#include <algorithm>
#include <unordered_set>

#include "bagforge/parallel.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

MentionIndex MentionIndex::build(const EntitySet& entities) {
  MentionIndex index;
  index.nodes_.emplace_back();
  for (std::uint32_t e = 0; e < entities.size(); ++e) {
    const EntityId id{e};
    for (const auto& form : entities[id].forms) {
      const auto cps = text::decode_utf8(form);
      if (!cps || cps->empty()) continue;
      std::uint32_t node = 0;
      for (char32_t c : *cps) {
        auto& children = index.nodes_[node].children;
        auto it = std::lower_bound(
            children.begin(), children.end(), c,
            [](const auto& p, char32_t key) { return p.first < key; });
        if (it != children.end() && it->first == c) {
          node = it->second;
        } else {
          const auto next = static_cast<std::uint32_t>(index.nodes_.size());
          children.insert(it, {c, next});
          index.nodes_.emplace_back();
          node = next;
        }
      }
      auto& slot = index.nodes_[node].owner_slot;
      if (slot < 0) {
        slot = static_cast<std::int32_t>(index.owners_.size());
        index.owners_.emplace_back();
      }
      auto& owners = index.owners_[static_cast<std::size_t>(slot)];
      if (std::find(owners.begin(), owners.end(), id) == owners.end()) {
        owners.push_back(id);
      }
    }
  }
  for (auto& owners : index.owners_) std::sort(owners.begin(), owners.end());
  return index;
}

std::uint32_t MentionIndex::child(std::uint32_t node, char32_t c) const {
  const auto& children = nodes_[node].children;
  auto it = std::lower_bound(
      children.begin(), children.end(), c,
      [](const auto& p, char32_t key) { return p.first < key; });
  return (it != children.end() && it->first == c) ? it->second : 0;
}

std::span<const EntityId> MentionIndex::lookup(
    std::u32string_view form) const {
  std::uint32_t node = 0;
  for (char32_t c : form) {
    node = child(node, c);
    if (node == 0) return {};
  }
  const auto slot = nodes_[node].owner_slot;
  if (node == 0 || slot < 0) return {};
  return owners_[static_cast<std::size_t>(slot)];
}

std::size_t MentionIndex::longest_at(std::u32string_view text,
                                     std::size_t pos,
                                     std::int32_t* owner_slot) const {
  std::size_t best = 0;
  std::uint32_t node = 0;
  for (std::size_t i = pos; i < text.size(); ++i) {
    node = child(node, text[i]);
    if (node == 0) break;
    const auto slot = nodes_[node].owner_slot;
    if (slot >= 0) {
      const bool boundary_after =
          i + 1 == text.size() || !text::is_word_char(text[i + 1]);
      if (boundary_after) {
        best = i + 1 - pos;
        *owner_slot = slot;
      }
    }
  }
  return best;
}

std::vector<Mention> find_mentions(const MentionIndex& index,
                                   std::string_view text) {
  std::vector<Mention> out;
  const auto decoded = text::decode_utf8(text);
  if (!decoded) return out;
  const std::u32string_view cps = *decoded;
  std::size_t pos = 0;
  while (pos < cps.size()) {
    const bool boundary_before =
        pos == 0 || !text::is_word_char(cps[pos - 1]);
    std::int32_t slot = -1;
    const std::size_t len =
        boundary_before ? index.longest_at(cps, pos, &slot) : 0;
    if (len == 0) {
      ++pos;
      continue;
    }
    const std::string form = text::encode_utf8(cps.substr(pos, len));
    for (EntityId id : index.owners(slot)) {
      out.push_back({id, pos, pos + len, form});
    }
    pos += len;
  }
  return out;
}

std::vector<std::vector<Mention>> find_mentions_batch_serial(
    const MentionIndex& index, std::span<const RawSentence> sentences) {
  std::vector<std::vector<Mention>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(find_mentions(index, s.text));
  return out;
}

std::vector<std::vector<Mention>> find_mentions_batch(
    const MentionIndex& index, std::span<const RawSentence> sentences,
    int workers) {
  std::vector<std::vector<Mention>> out(sentences.size());
  const auto n = static_cast<std::int64_t>(sentences.size());
#pragma omp parallel for schedule(dynamic, 128) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = find_mentions(index, sentences[k].text);
  }
  return out;
}

std::string_view verdict_name(UniqueVerdict v) {
  switch (v) {
    case UniqueVerdict::kKeep: return "keep";
    case UniqueVerdict::kDuplicateEntity: return "duplicate_entity";
    case UniqueVerdict::kInsufficientEntities: return "insufficient_entities";
  }
  return "unknown";
}

UniqueVerdict enforce_unique(std::span<const Mention> mentions) {
  std::unordered_set<std::uint32_t> seen;
  for (const auto& m : mentions) {
    if (!seen.insert(to_index(m.entity)).second) {
      return UniqueVerdict::kDuplicateEntity;
    }
  }
  return seen.size() < 2 ? UniqueVerdict::kInsufficientEntities
                         : UniqueVerdict::kKeep;
}

}  // namespace bagforge
