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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bagforge/kb_store.hpp"

namespace bagforge {

// Relations come in inverse pairs (0,1), (2,3), ...; a sentence that
// expresses (h, r, t) in anti-KB order reads like a forward sentence for
// (t, inverse(r), h). reverse_prob adds that inverse fact to the KB, which
// is what makes sentence-ordered markers ambiguous. Values below 1 leave
// some reversed pairs open to negative sampling, i.e. label noise.
struct SynthConfig {
  std::size_t n_entities = 60;
  std::size_t n_relations = 6;
  std::size_t n_triples = 400;
  std::size_t sentences_per_triple = 6;
  double flip_prob = 0.5;
  double noise_prob = 0.3;
  double distractor_prob = 0.5;
  double reverse_prob = 1.0;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  // Unknown keys throw kInvalidConfig.
  static SynthConfig from_json(const nlohmann::json& j);
};

struct SynthTriple {
  std::string head;
  std::string relation;
  std::string tail;
  bool reverse = false;
};

struct SynthSentence {
  std::string sid;
  std::string text;
  std::size_t triple = 0;  // index into triples
  bool flipped = false;
  bool noise = false;
  bool distractor = false;
};

struct SynthData {
  std::vector<EntityRecord> entities;
  std::vector<std::string> relations;
  std::vector<SynthTriple> triples;
  std::vector<SynthSentence> sentences;
};

// Throws kInvalidConfig for bad probabilities or sizes, kUnderdetermined
// when some relation could get no expressive sentence.
SynthData generate(const SynthConfig& config);

std::size_t inverse_relation(std::size_t r, std::size_t n_relations);  // r if unpaired

// entities.jsonl, triples.tsv, sentences.tsv, manifest.jsonl
void write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace bagforge
