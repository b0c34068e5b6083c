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

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "bagforge/text.hpp"

namespace bagforge {

struct RawSentence {
  std::string sid;
  std::string text;  // normalised
};

struct FilterConfig {
  std::size_t min_chars = 32;  // inclusive
  std::size_t max_chars = 256;  // inclusive
};

enum class SentenceVerdict {
  kKept,
  kTooShort,
  kTooLong,
  kDuplicate,
  kEncodingError,
};

struct FilterStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t too_short = 0;
  std::size_t too_long = 0;
  std::size_t duplicate = 0;
  std::size_t encoding_error = 0;

  void count(SentenceVerdict v);
  nlohmann::json to_json() const;
  bool operator==(const FilterStats&) const = default;
};

// One input line: "sid<TAB>text", or bare text (sid becomes "L<line>").
struct InputLine {
  std::size_t line_no = 0;
  std::string content;
};

// Stateful streaming filter. Lines are fed in input order and the kept
// sentences come back in the same order; duplicate detection spans every
// batch fed so far.
class SentenceFilter {
 public:
  explicit SentenceFilter(FilterConfig config = {}) : config_(config) {}

  // Serial reference.
  std::vector<RawSentence> feed_serial(const std::vector<InputLine>& batch);
  // Normalisation and hashing run on `workers` threads; the duplicate pass
  // is a single ordered sweep, so output matches feed_serial exactly.
  std::vector<RawSentence> feed(const std::vector<InputLine>& batch,
                                int workers);

  const FilterStats& stats() const { return stats_; }

 private:
  struct Prepared;
  Prepared prepare(const InputLine& line) const;
  std::vector<RawSentence> commit(std::vector<Prepared>& prepared);

  FilterConfig config_;
  FilterStats stats_;
  std::unordered_set<text::Hash128, text::Hash128Hasher> seen_texts_;
  std::unordered_set<std::string> seen_sids_;
};

// Reads the whole stream, writes "sid<TAB>text" lines, returns statistics.
FilterStats filter_sentences(std::istream& in, std::ostream& out,
                             const FilterConfig& config = {}, int workers = 0);

std::vector<RawSentence> read_sentences(std::istream& in);

}  // namespace bagforge
