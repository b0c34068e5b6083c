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

#include "bagforge/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <unordered_set>

#include "bagforge/error.hpp"
#include "bagforge/io.hpp"

namespace bagforge {

nlohmann::json SynthConfig::to_json() const {
  return {{"n_entities", n_entities},
          {"n_relations", n_relations},
          {"n_triples", n_triples},
          {"sentences_per_triple", sentences_per_triple},
          {"flip_prob", flip_prob},
          {"noise_prob", noise_prob},
          {"distractor_prob", distractor_prob},
          {"reverse_prob", reverse_prob},
          {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_entities") c.n_entities = value.get<std::size_t>();
    else if (key == "n_relations") c.n_relations = value.get<std::size_t>();
    else if (key == "n_triples") c.n_triples = value.get<std::size_t>();
    else if (key == "sentences_per_triple") c.sentences_per_triple = value.get<std::size_t>();
    else if (key == "flip_prob") c.flip_prob = value.get<double>();
    else if (key == "noise_prob") c.noise_prob = value.get<double>();
    else if (key == "distractor_prob") c.distractor_prob = value.get<double>();
    else if (key == "reverse_prob") c.reverse_prob = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw Error(Errc::kInvalidConfig, "unknown config key synth." + key);
  }
  return c;
}

std::size_t inverse_relation(std::size_t r, std::size_t n_relations) {
  const std::size_t partner = r ^ 1u;
  return partner < n_relations ? partner : r;
}

namespace {

class WordMaker {
 public:
  explicit WordMaker(std::mt19937_64& rng) : rng_(rng) {}

  std::string make(int syllables) {
    static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    std::uniform_int_distribution<std::size_t> on(0, kOnsets.size() - 1);
    std::uniform_int_distribution<std::size_t> vo(0, kVowels.size() - 1);
    for (;;) {
      std::string w;
      for (int s = 0; s < syllables; ++s) {
        w += kOnsets[on(rng_)];
        w += kVowels[vo(rng_)];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::mt19937_64& rng_;
  std::unordered_set<std::string> used_;
};

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(Errc::kInvalidConfig, std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

SynthData generate(const SynthConfig& c) {
  check_probability(c.flip_prob, "flip_prob");
  check_probability(c.noise_prob, "noise_prob");
  check_probability(c.distractor_prob, "distractor_prob");
  check_probability(c.reverse_prob, "reverse_prob");
  if (c.n_relations < 2) throw Error(Errc::kInvalidConfig, "n_relations must be >= 2");
  if (c.n_entities < 3) throw Error(Errc::kInvalidConfig, "n_entities must be >= 3");
  if (c.n_triples > c.n_entities * (c.n_entities - 1) / 2) {
    throw Error(Errc::kInvalidConfig, "n_triples exceeds the unordered entity pairs");
  }
  if (c.noise_prob < 1.0 &&
      (c.n_triples < c.n_relations || c.sentences_per_triple == 0)) {
    throw Error(Errc::kUnderdetermined,
                "some relation would get no expressive sentence (need n_triples >= "
                "n_relations and sentences_per_triple >= 1)");
  }

  std::mt19937_64 rng(c.seed);
  std::bernoulli_distribution coin_flip(c.flip_prob);
  std::bernoulli_distribution coin_noise(c.noise_prob);
  std::bernoulli_distribution coin_distractor(c.distractor_prob);
  std::bernoulli_distribution coin_reverse(c.reverse_prob);
  WordMaker words(rng);

  SynthData out;
  char buf[32];
  for (std::size_t i = 0; i < c.n_entities; ++i) {
    std::snprintf(buf, sizeof buf, "E%05zu", i + 1);
    out.entities.push_back({buf, {words.make(3)}});
  }
  std::vector<std::string> active(c.n_relations);
  std::vector<std::string> passive(c.n_relations);
  for (std::size_t r = 0; r < c.n_relations; ++r) {
    out.relations.push_back("rel_" + std::to_string(r));
    active[r] = words.make(2) + " " + words.make(2);
  }
  for (std::size_t r = 0; r < c.n_relations; ++r) {
    const std::size_t inv = inverse_relation(r, c.n_relations);
    passive[r] = inv != r ? active[inv] : words.make(2) + " " + words.make(2);
  }
  std::vector<std::string> fillers;
  for (int i = 0; i < 24; ++i) fillers.push_back(words.make(2));

  // Base facts: distinct unordered pairs, relations dealt round-robin.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::uniform_int_distribution<std::size_t> pick_entity(0, c.n_entities - 1);
  while (pairs.size() < c.n_triples) {
    const std::size_t a = pick_entity(rng);
    const std::size_t b = pick_entity(rng);
    if (a == b || !used.insert(std::minmax(a, b)).second) continue;
    pairs.emplace_back(a, b);
  }
  std::vector<std::size_t> rels(c.n_triples);
  for (std::size_t i = 0; i < c.n_triples; ++i) rels[i] = i % c.n_relations;
  std::shuffle(rels.begin(), rels.end(), rng);

  std::uniform_int_distribution<std::size_t> pick_filler(0, fillers.size() - 1);
  std::uniform_int_distribution<int> pick_count(0, 2);
  const auto filler_run = [&](int n) {
    std::string s;
    for (int k = 0; k < n; ++k) {
      if (!s.empty()) s += ' ';
      s += fillers[pick_filler(rng)];
    }
    return s;
  };

  std::size_t sid = 0;
  for (std::size_t i = 0; i < c.n_triples; ++i) {
    const auto [h, t] = pairs[i];
    const std::size_t r = rels[i];
    const std::size_t base_index = out.triples.size();
    out.triples.push_back({out.entities[h].cui, out.relations[r], out.entities[t].cui, false});
    const std::size_t inv = inverse_relation(r, c.n_relations);
    if (inv != r && coin_reverse(rng)) {
      out.triples.push_back(
          {out.entities[t].cui, out.relations[inv], out.entities[h].cui, true});
    }

    for (std::size_t k = 0; k < c.sentences_per_triple; ++k) {
      SynthSentence s;
      s.triple = base_index;
      s.flipped = coin_flip(rng);
      s.noise = coin_noise(rng);
      s.distractor = coin_distractor(rng);
      const std::string& first = out.entities[s.flipped ? t : h].forms[0];
      const std::string& second = out.entities[s.flipped ? h : t].forms[0];
      const std::string middle =
          s.noise ? filler_run(2 + pick_count(rng)) : (s.flipped ? passive[r] : active[r]);

      std::string text;
      const std::string lead = filler_run(pick_count(rng));
      if (!lead.empty()) text = lead + " ";
      text += first + " " + middle + " " + second;
      const std::string trail = filler_run(pick_count(rng));
      if (!trail.empty()) text += " " + trail;
      if (s.distractor) {
        std::size_t e = pick_entity(rng);
        while (e == h || e == t) e = pick_entity(rng);
        text += " " + fillers[pick_filler(rng)] + " " + out.entities[e].forms[0];
      }
      while (text.size() + 2 < 32) text += " " + fillers[pick_filler(rng)];
      text += " .";

      std::snprintf(buf, sizeof buf, "s%07zu", ++sid);
      s.sid = buf;
      s.text = std::move(text);
      out.sentences.push_back(std::move(s));
    }
  }
  return out;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  {
    auto out = io::open_output(dir / "entities.jsonl");
    for (const auto& e : data.entities) {
      out << nlohmann::json{{"cui", e.cui}, {"forms", e.forms}}.dump() << '\n';
    }
  }
  {
    auto out = io::open_output(dir / "triples.tsv");
    for (const auto& t : data.triples) {
      out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
    }
  }
  {
    auto out = io::open_output(dir / "sentences.tsv");
    for (const auto& s : data.sentences) out << s.sid << '\t' << s.text << '\n';
  }
  {
    auto out = io::open_output(dir / "manifest.jsonl");
    for (const auto& s : data.sentences) {
      const auto& t = data.triples[s.triple];
      out << nlohmann::json{{"sid", s.sid},
                            {"head", t.head},
                            {"relation", t.relation},
                            {"tail", t.tail},
                            {"flipped", s.flipped},
                            {"noise", s.noise},
                            {"distractor", s.distractor}}
                 .dump()
          << '\n';
    }
  }
}

}  // namespace bagforge
