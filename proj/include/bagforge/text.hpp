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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// UTF-8 helpers and the one text normalisation used everywhere: NFC, lowercase,
// whitespace runs collapsed to a single space, ends trimmed. Offsets reported
// by the matcher and tagger count Unicode scalar values of normalised text.
namespace bagforge::text {

std::optional<std::u32string> decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view code_points);
bool is_valid_utf8(std::string_view utf8);

// Returns nullopt for invalid UTF-8.
std::optional<std::string> try_normalize(std::string_view utf8);
// Throws Error(kMalformedInput) for invalid UTF-8.
std::string normalize(std::string_view utf8);

std::size_t char_length(std::string_view utf8);

// Letters, digits and combining marks. Anything else is a word boundary.
bool is_word_char(char32_t c);
bool is_space(char32_t c);
bool is_punct(char32_t c);

struct Hash128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  auto operator<=>(const Hash128&) const = default;
};

struct Hash128Hasher {
  std::size_t operator()(const Hash128& h) const noexcept {
    return static_cast<std::size_t>(h.lo ^ (h.hi * 0x9e3779b97f4a7c15ULL));
  }
};

Hash128 content_hash(std::string_view bytes);

// FNV-1a; stable across platforms and runs, unlike std::hash.
std::uint64_t stable_hash(std::string_view bytes);

// Derives an independent stream seed from a global seed and a key (sid,
// group, ...), so per-item randomness does not depend on processing order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

}  // namespace bagforge::text
