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

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bagforge/bag_builder.hpp"
#include "bagforge/evaluator.hpp"
#include "bagforge/group_linker.hpp"
#include "bagforge/kb_store.hpp"
#include "bagforge/tagging.hpp"

namespace bagforge::records {

// Readers throw kMalformedInput with file:line, kUnknownEntity for cuis
// missing from `entities`.

nlohmann::json mentions_to_json(const MatchedSentence& s, const EntitySet& entities);
void write_mentions(const std::filesystem::path& path,
                    std::span<const MatchedSentence> sentences,
                    const EntitySet& entities);
std::vector<MatchedSentence> read_mentions(const std::filesystem::path& path,
                                           const EntitySet& entities);

nlohmann::json match_to_json(const SentenceGroupMatch& m, const EntitySet& entities);
void write_matches(const std::filesystem::path& path,
                   std::span<const SentenceGroupMatch> matches,
                   const EntitySet& entities);
std::vector<SentenceGroupMatch> read_matches(const std::filesystem::path& path,
                                             const EntitySet& entities);

nlohmann::json tagged_to_json(const TaggedSentence& t, const EntitySet& entities);
TaggedSentence tagged_from_json(const nlohmann::json& j, const EntitySet& entities);
void write_tagged(const std::filesystem::path& path,
                  std::span<const TaggedSentencePtr> tagged,
                  const EntitySet& entities);
std::vector<TaggedSentencePtr> read_tagged(const std::filesystem::path& path,
                                           const EntitySet& entities);

// Bag lines carry "relation" (base id) next to the model "label".
void write_bags(const std::filesystem::path& path, std::span<const Bag> bags,
                const EntitySet& entities);
// Sentences repeated across bags are shared after reading.
std::vector<Bag> read_bags(const std::filesystem::path& path,
                           const EntitySet& entities);

void write_relations(const std::filesystem::path& path, const RelationVocab& vocab);
RelationVocab read_relations(const std::filesystem::path& path);

void write_predictions(const std::filesystem::path& path,
                       std::span<const Candidate> ranked, const EntitySet& entities,
                       const RelationVocab& vocab);
void write_pr_curve(const std::filesystem::path& path, std::span<const PrPoint> curve);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace bagforge::records
