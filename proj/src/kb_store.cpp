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

#include "bagforge/kb_store.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

#include "bagforge/error.hpp"
#include "bagforge/io.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

using nlohmann::json;

EntityId EntitySet::add(EntityRecord record) {
  if (record.forms.empty()) {
    throw Error(Errc::kMalformedInput,
                "entity " + record.cui + " has no surface forms");
  }
  if (by_cui_.contains(record.cui)) {
    throw Error(Errc::kMalformedInput, "duplicate entity " + record.cui);
  }
  const EntityId id{static_cast<std::uint32_t>(records_.size())};
  by_cui_.emplace(record.cui, id);
  records_.push_back(std::move(record));
  return id;
}

const EntityId* EntitySet::find(std::string_view cui) const {
  auto it = by_cui_.find(std::string(cui));
  return it == by_cui_.end() ? nullptr : &it->second;
}

EntityId EntitySet::id_of(std::string_view cui) const {
  if (const EntityId* id = find(cui)) return *id;
  throw Error(Errc::kUnknownEntity, "unknown entity " + std::string(cui));
}

RelationVocab::RelationVocab() { add(kNAName); }

RelationVocab::RelationVocab(const std::vector<std::string>& names)
    : RelationVocab() {
  for (const auto& n : names) {
    if (n != kNAName) add(n);
  }
}

RelationId RelationVocab::add(std::string_view name) {
  if (const RelationId* id = find(name)) return *id;
  const RelationId id{static_cast<std::uint32_t>(names_.size())};
  names_.emplace_back(name);
  index_.emplace(std::string(name), id);
  return id;
}

const RelationId* RelationVocab::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &it->second;
}

RelationId RelationVocab::id_of(std::string_view name) const {
  if (const RelationId* id = find(name)) return *id;
  throw Error(Errc::kUnknownEntity, "unknown relation " + std::string(name));
}

EntitySet load_entities(const std::filesystem::path& entities_path) {
  auto in = io::open_input(entities_path);
  EntitySet entities;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    EntityRecord record;
    try {
      const json j = json::parse(line);
      record.cui = j.at("cui").get<std::string>();
      for (const auto& f : j.at("forms")) {
        auto form = text::try_normalize(f.get<std::string>());
        if (!form) {
          throw Error(Errc::kMalformedInput, "form is not valid UTF-8");
        }
        if (form->empty()) continue;
        if (std::find(record.forms.begin(), record.forms.end(), *form) ==
            record.forms.end()) {
          record.forms.push_back(*std::move(form));
        }
      }
    } catch (const json::exception& e) {
      throw Error(Errc::kMalformedInput,
                  io::location(entities_path, line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::kMalformedInput,
                  io::location(entities_path, line_no) + ": " + e.detail());
    }
    if (record.cui.empty()) {
      throw Error(Errc::kMalformedInput,
                  io::location(entities_path, line_no) + ": empty cui");
    }
    try {
      entities.add(std::move(record));
    } catch (const Error& e) {
      throw Error(Errc::kMalformedInput,
                  io::location(entities_path, line_no) + ": " + e.detail());
    }
  }
  return entities;
}

KnowledgeBase load_kb(const std::filesystem::path& triples_path,
                      const std::filesystem::path& entities_path,
                      const RelationFilter& filter, KbLoadStats* stats) {
  KnowledgeBase kb;
  kb.entities = load_entities(entities_path);

  struct RawTriple {
    EntityId head;
    std::string rel;
    EntityId tail;
    auto operator<=>(const RawTriple&) const = default;
  };
  std::set<RawTriple> raw;
  KbLoadStats local;

  auto in = io::open_input(triples_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ++local.lines;
    const auto cols = io::split(line, '\t');
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty() ||
        cols[2].empty()) {
      throw Error(Errc::kMalformedInput,
                  io::location(triples_path, line_no) +
                      ": expected head<TAB>relation<TAB>tail");
    }
    if (cols[1] == kNAName) {
      throw Error(Errc::kMalformedInput,
                  io::location(triples_path, line_no) +
                      ": relation name NA is reserved");
    }
    const EntityId* head = kb.entities.find(cols[0]);
    const EntityId* tail = kb.entities.find(cols[2]);
    if (head == nullptr || tail == nullptr) {
      throw Error(Errc::kUnknownEntity,
                  io::location(triples_path, line_no) + ": unknown entity " +
                      std::string(head == nullptr ? cols[0] : cols[2]));
    }
    if (filter && !filter(cols[1])) {
      ++local.filtered;
      continue;
    }
    if (!raw.insert({*head, std::string(cols[1]), *tail}).second) {
      ++local.duplicates;
    }
  }

  std::set<std::string> names;
  for (const auto& t : raw) names.insert(t.rel);
  kb.relations = RelationVocab(std::vector<std::string>(names.begin(), names.end()));

  kb.triples.reserve(raw.size());
  for (const auto& t : raw) {
    kb.triples.push_back({t.head, kb.relations.id_of(t.rel), t.tail});
  }
  std::sort(kb.triples.begin(), kb.triples.end());
  if (stats != nullptr) *stats = local;
  return kb;
}

void write_kb(const KnowledgeBase& kb, const std::filesystem::path& dir) {
  {
    auto out = io::open_output(dir / "entities.jsonl");
    for (const auto& r : kb.entities.records()) {
      out << json{{"cui", r.cui}, {"forms", r.forms}}.dump() << '\n';
    }
  }
  {
    auto out = io::open_output(dir / "triples.tsv");
    for (const auto& t : kb.triples) {
      out << kb.entities.cui(t.head) << '\t' << kb.relations.name(t.rel)
          << '\t' << kb.entities.cui(t.tail) << '\n';
    }
  }
  {
    auto out = io::open_output(dir / "relations.json");
    out << json(kb.relations.names()).dump(1) << '\n';
  }
}

const std::vector<RelationId>& GroupIndex::relations(const Group& g) const {
  static const std::vector<RelationId> kEmpty;
  auto it = index_.find(g);
  return it == index_.end() ? kEmpty : it->second;
}

void GroupIndex::mark_negative(const Group& g) {
  if (is_positive(g)) {
    throw Error(Errc::kInvalidConfig, "negative group is in G+");
  }
  negatives_.insert(g);
}

void GroupIndex::add(const Triple& t) {
  auto [it, inserted] = index_.try_emplace(t.group());
  if (inserted) groups_.push_back(t.group());
  auto& rels = it->second;
  if (std::find(rels.begin(), rels.end(), t.rel) == rels.end()) {
    rels.push_back(t.rel);
  }
}

void GroupIndex::finalize() {
  std::sort(groups_.begin(), groups_.end());
  for (auto& [g, rels] : index_) std::sort(rels.begin(), rels.end());
}

GroupIndex build_group_index(const std::vector<Triple>& triples) {
  GroupIndex index;
  for (const auto& t : triples) index.add(t);
  index.finalize();
  return index;
}

std::vector<std::pair<std::string, std::string>> textual_pairs(
    const Group& group, const EntitySet& entities) {
  if (group.head == group.tail) {
    throw Error(Errc::kSelfPair,
                "self pair for entity " + entities.cui(group.head));
  }
  if (to_index(group.head) >= entities.size() ||
      to_index(group.tail) >= entities.size()) {
    throw Error(Errc::kUnknownEntity, "group references unknown entity id");
  }
  const auto& heads = entities[group.head].forms;
  const auto& tails = entities[group.tail].forms;
  if (heads.empty() || tails.empty()) {
    throw Error(Errc::kMalformedInput, "entity without surface forms");
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(heads.size() * tails.size());
  for (const auto& h : heads) {
    for (const auto& t : tails) pairs.emplace_back(h, t);
  }
  return pairs;
}

}  // namespace bagforge
