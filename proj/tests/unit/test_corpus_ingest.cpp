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

#include "bagforge/corpus_ingest.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "bagforge/error.hpp"

namespace bagforge {
namespace {

std::string of_length(std::size_t n) {
  std::string s;
  while (s.size() < n) s += s.size() % 5 == 4 ? ' ' : 'a' + static_cast<char>(s.size() % 26);
  s.back() = 'z';
  return s;
}

TEST(FilterSentences, LengthBoundsAreInclusive) {
  std::istringstream in("s1\t" + of_length(31) + "\ns2\t" + of_length(32) + "\ns3\t" +
                        of_length(256) + "\ns4\t" + of_length(257) + "\n");
  std::ostringstream out;
  const auto stats = filter_sentences(in, out);
  EXPECT_EQ(stats.too_short, 1u);
  EXPECT_EQ(stats.too_long, 1u);
  EXPECT_EQ(stats.kept, 2u);
  EXPECT_EQ(out.str(), "s2\t" + of_length(32) + "\ns3\t" + of_length(256) + "\n");
}

TEST(FilterSentences, LengthCountsCodePointsNotBytes) {
  // 32 characters, 64 bytes.
  std::string s;
  for (int i = 0; i < 32; ++i) s += "\xC3\xA9";
  std::istringstream in("s1\t" + s + "\n");
  std::ostringstream out;
  EXPECT_EQ(filter_sentences(in, out).kept, 1u);
}

TEST(FilterSentences, DuplicateAfterNormalisationKeptOnce) {
  const std::string a = "Women with neurofibromatosis 1 have elevated risk";
  const std::string b = "women  with NEUROFIBROMATOSIS 1 have elevated risk ";
  std::istringstream in("s1\t" + a + "\ns2\t" + b + "\n");
  std::ostringstream out;
  const auto stats = filter_sentences(in, out);
  EXPECT_EQ(stats.kept, 1u);
  EXPECT_EQ(stats.duplicate, 1u);
  EXPECT_EQ(out.str(), "s1\twomen with neurofibromatosis 1 have elevated risk\n");
}

TEST(FilterSentences, EncodingErrorsDoNotAbortTheStream) {
  std::istringstream in("s1\tbad \xFF bytes in this sentence, long enough to keep\ns2\t" +
                        of_length(40) + "\n");
  std::ostringstream out;
  const auto stats = filter_sentences(in, out);
  EXPECT_EQ(stats.encoding_error, 1u);
  EXPECT_EQ(stats.kept, 1u);
}

TEST(FilterSentences, BareLinesGetLineNumberSids) {
  std::istringstream in(of_length(40) + "\n" + of_length(50) + "\n");
  std::ostringstream out;
  filter_sentences(in, out);
  std::istringstream back(out.str());
  const auto kept = read_sentences(back);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].sid, "L1");
  EXPECT_EQ(kept[1].sid, "L2");
}

TEST(FilterSentences, AccountingAndParallelEquivalence) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(10, 300);
  std::uniform_int_distribution<int> letter(0, 3);  // tiny alphabet forces duplicates
  std::vector<InputLine> lines;
  for (std::size_t i = 0; i < 5000; ++i) {
    std::string s = "s" + std::to_string(i) + "\t";
    const int n = i % 7 == 0 ? 33 : len(rng);
    for (int k = 0; k < n; ++k) s += k % 6 == 5 ? ' ' : static_cast<char>('a' + letter(rng));
    if (i % 997 == 0) s += "\xC0";
    if (i % 50 == 49) s = "s" + std::to_string(i) + lines[i - 7].content.substr(lines[i - 7].content.find('\t'));
    lines.push_back({i + 1, s});
  }
  SentenceFilter serial, parallel;
  std::vector<RawSentence> a, b;
  for (std::size_t start = 0; start < lines.size(); start += 1000) {
    const std::vector<InputLine> chunk(lines.begin() + static_cast<std::ptrdiff_t>(start),
                                       lines.begin() + static_cast<std::ptrdiff_t>(start + 1000));
    for (auto& s : serial.feed_serial(chunk)) a.push_back(s);
    for (auto& s : parallel.feed(chunk, 4)) b.push_back(s);
  }
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sid, b[i].sid);
    EXPECT_EQ(a[i].text, b[i].text);
  }
  const auto& st = serial.stats();
  EXPECT_EQ(st, parallel.stats());
  EXPECT_EQ(st.input, lines.size());
  EXPECT_EQ(st.kept + st.too_short + st.too_long + st.duplicate + st.encoding_error, st.input);
  EXPECT_GT(st.duplicate, 0u);
  EXPECT_GT(st.encoding_error, 0u);
}

TEST(ReadSentences, RejectsLinesWithoutSid) {
  std::istringstream in("no tab here\n");
  EXPECT_THROW(read_sentences(in), Error);
}

}  // namespace
}  // namespace bagforge
