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
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bagforge/mil_model.hpp"

namespace bagforge {

// Index: <prefix>.index.jsonl, {"sid", "offset", "rows", "cols"} with the
// byte offset into <prefix>.bin (row-major little-endian float32).
struct ArchiveEntry {
  std::string sid;
  std::uint64_t offset = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

// The same sentence is tagged once per group it supports, so archive
// entries are keyed by sentence and group.
std::string archive_key(std::string_view sid, std::string_view head_cui,
                        std::string_view tail_cui);

std::filesystem::path archive_index_path(const std::filesystem::path& prefix);
std::filesystem::path archive_data_path(const std::filesystem::path& prefix);

class EmbeddingArchive {
 public:
  static EmbeddingArchive open(const std::filesystem::path& prefix);

  bool contains(std::string_view key) const;
  // Throws kMissingSid.
  std::shared_ptr<const StateMatrix> load(std::string_view key) const;
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::uint32_t cols() const { return cols_; }

  // Offsets monotone and non-overlapping, one width throughout, and the
  // data file exactly as large as the index says. Throws kMalformedInput.
  void verify() const;

 private:
  std::filesystem::path data_;
  std::vector<ArchiveEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_key_;
  std::uint32_t cols_ = 0;
};

class ArchiveWriter {
 public:
  explicit ArchiveWriter(const std::filesystem::path& prefix);
  void add(std::string_view key, const StateMatrix& states);
  void close();

 private:
  std::ofstream index_;
  std::ofstream data_;
  std::uint64_t offset_ = 0;
};

struct StubRequest {
  std::string key;
  std::uint32_t rows = 0;
};

// Deterministic pseudo-random states per key, standing in for the
// external encoder in tests and Precomputed-mode smoke runs.
void write_stub_archive(const std::filesystem::path& prefix,
                        std::span<const StubRequest> requests, std::uint32_t cols,
                        std::uint64_t seed);

}  // namespace bagforge
