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

#include "bagforge/embedding_archive.hpp"

#include <gtest/gtest.h>

#include <cstring>

#include "bagforge/error.hpp"
#include "test_util.hpp"

namespace bagforge {
namespace {

using testutil::error_of;
using testutil::TempDir;

StateMatrix counting(Eigen::Index rows, Eigen::Index cols, float base) {
  StateMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = base + static_cast<float>(i);
  return m;
}

TEST(Archive, RoundTripAndLayout) {
  TempDir dir;
  const auto prefix = dir / "emb";
  {
    ArchiveWriter w(prefix);
    w.add("s1|C1|C2", counting(3, 4, 0.0f));
    w.add("s2|C1|C2", counting(5, 4, 100.0f));
    w.close();
  }
  const auto a = EmbeddingArchive::open(prefix);
  a.verify();
  EXPECT_EQ(a.cols(), 4u);
  ASSERT_EQ(a.entries().size(), 2u);
  EXPECT_EQ(a.entries()[1].offset, 3u * 4u * 4u);
  EXPECT_EQ(std::filesystem::file_size(archive_data_path(prefix)), (3u + 5u) * 4u * 4u);
  EXPECT_EQ(*a.load("s2|C1|C2"), counting(5, 4, 100.0f));
  EXPECT_TRUE(a.contains("s1|C1|C2"));
  EXPECT_FALSE(a.contains("s3|C1|C2"));
  EXPECT_EQ(error_of([&] { a.load("s3|C1|C2"); }), Errc::kMissingSid);

  // Row-major little-endian float32 on disk.
  const std::string raw = testutil::read_file(archive_data_path(prefix));
  float second = 0.0f;
  std::memcpy(&second, raw.data() + 4, 4);
  EXPECT_EQ(second, 1.0f);
}

TEST(Archive, KeyCombinesSidAndGroup) {
  EXPECT_EQ(archive_key("s1", "C1", "C2"), "s1|C1|C2");
  EXPECT_NE(archive_key("s1", "C1", "C2"), archive_key("s1", "C2", "C1"));
}

TEST(Archive, VerifyCatchesTruncationAndGaps) {
  TempDir dir;
  const auto prefix = dir / "emb";
  const std::vector<StubRequest> reqs{{"a", 2}, {"b", 3}};
  write_stub_archive(prefix, reqs, 8, 1);
  EmbeddingArchive::open(prefix).verify();

  std::filesystem::resize_file(archive_data_path(prefix), 2 * 8 * 4 + 7);
  EXPECT_EQ(error_of([&] { EmbeddingArchive::open(prefix).verify(); }), Errc::kMalformedInput);

  testutil::write_file(archive_index_path(prefix),
                       R"({"sid":"a","offset":0,"rows":2,"cols":8})" "\n"
                       R"({"sid":"b","offset":100,"rows":3,"cols":8})" "\n");
  EXPECT_EQ(error_of([&] { EmbeddingArchive::open(prefix).verify(); }), Errc::kMalformedInput);

  testutil::write_file(archive_index_path(prefix),
                       R"({"sid":"a","offset":0,"rows":2,"cols":8})" "\n"
                       R"({"sid":"a","offset":64,"rows":3,"cols":8})" "\n");
  EXPECT_EQ(error_of([&] { EmbeddingArchive::open(prefix); }), Errc::kMalformedInput);
  EXPECT_EQ(error_of([&] { EmbeddingArchive::open(dir / "missing"); }), Errc::kIo);
}

TEST(Archive, StubIsDeterministicPerKey) {
  TempDir dir;
  const std::vector<StubRequest> ab{{"a", 2}, {"b", 3}};
  const std::vector<StubRequest> ba{{"b", 3}, {"a", 2}};
  write_stub_archive(dir / "x", ab, 6, 4);
  write_stub_archive(dir / "y", ba, 6, 4);
  write_stub_archive(dir / "z", ab, 6, 5);
  const auto x = EmbeddingArchive::open(dir / "x");
  const auto y = EmbeddingArchive::open(dir / "y");
  const auto z = EmbeddingArchive::open(dir / "z");
  EXPECT_EQ(*x.load("a"), *y.load("a"));
  EXPECT_EQ(*x.load("b"), *y.load("b"));
  EXPECT_NE(*x.load("a"), *z.load("a"));
  EXPECT_EQ(x.load("b")->rows(), 3);
}

}  // namespace
}  // namespace bagforge
