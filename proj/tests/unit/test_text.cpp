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

#include "bagforge/text.hpp"

#include <gtest/gtest.h>

#include "bagforge/error.hpp"

namespace bagforge::text {
namespace {

TEST(Normalize, LowercasesCollapsesAndTrims) {
  EXPECT_EQ(normalize("  Breast\t\tCANCER \n"), "breast cancer");
  EXPECT_EQ(normalize(""), "");
}

TEST(Normalize, ComposesToNfc) {
  // "e" + combining acute -> U+00E9
  EXPECT_EQ(normalize("Caf\x65\xCC\x81"), "caf\xC3\xA9");
  EXPECT_EQ(char_length(normalize("Caf\x65\xCC\x81")), 4u);
}

TEST(Normalize, IsIdempotent) {
  for (const char* s : {"Women WITH  Neurofibromatosis 1", "\xC3\x89tude  \xC3\xA0 Paris", "a-b, c."}) {
    const std::string once = normalize(s);
    EXPECT_EQ(normalize(once), once);
  }
}

TEST(Normalize, RejectsInvalidUtf8) {
  EXPECT_FALSE(try_normalize("ab\xFF").has_value());
  EXPECT_THROW(normalize("\xC3"), Error);
  EXPECT_FALSE(is_valid_utf8("\xED\xA0\x80"));  // surrogate
  EXPECT_TRUE(is_valid_utf8("plain"));
}

TEST(Utf8, RoundTrip) {
  const std::string s = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80";
  const auto cps = decode_utf8(s);
  ASSERT_TRUE(cps.has_value());
  EXPECT_EQ(cps->size(), 4u);
  EXPECT_EQ(encode_utf8(*cps), s);
  EXPECT_EQ(char_length(s), 4u);
}

TEST(CharClasses, WordBoundaries) {
  EXPECT_TRUE(is_word_char(U'a'));
  EXPECT_TRUE(is_word_char(U'7'));
  EXPECT_TRUE(is_word_char(U'é'));
  EXPECT_FALSE(is_word_char(U' '));
  EXPECT_FALSE(is_word_char(U'-'));
  EXPECT_TRUE(is_punct(U','));
  EXPECT_TRUE(is_space(U'\t'));
}

TEST(Hashing, StableAndDistinct) {
  // FNV-1a 64 reference values.
  EXPECT_EQ(stable_hash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(stable_hash("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(content_hash("abc"), content_hash("abd"));
  EXPECT_EQ(content_hash("abc"), content_hash("abc"));
}

TEST(Hashing, DerivedSeedsDependOnBothInputs) {
  EXPECT_EQ(derive_seed(1, "link"), derive_seed(1, "link"));
  EXPECT_NE(derive_seed(1, "link"), derive_seed(2, "link"));
  EXPECT_NE(derive_seed(1, "link"), derive_seed(1, "bags"));
}

}  // namespace
}  // namespace bagforge::text
