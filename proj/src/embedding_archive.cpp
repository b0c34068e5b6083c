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

#include <bit>
#include <random>

#include <nlohmann/json.hpp>

#include "bagforge/error.hpp"
#include "bagforge/io.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

static_assert(std::endian::native == std::endian::little,
              "archive IO assumes a little-endian host");

std::string archive_key(std::string_view sid, std::string_view head_cui,
                        std::string_view tail_cui) {
  std::string key(sid);
  key += '|';
  key += head_cui;
  key += '|';
  key += tail_cui;
  return key;
}

std::filesystem::path archive_index_path(const std::filesystem::path& prefix) {
  return std::filesystem::path(prefix.string() + ".index.jsonl");
}

std::filesystem::path archive_data_path(const std::filesystem::path& prefix) {
  return std::filesystem::path(prefix.string() + ".bin");
}

EmbeddingArchive EmbeddingArchive::open(const std::filesystem::path& prefix) {
  EmbeddingArchive a;
  a.data_ = archive_data_path(prefix);
  const auto index_path = archive_index_path(prefix);
  auto in = io::open_input(index_path);
  if (!std::filesystem::exists(a.data_)) {
    throw Error(Errc::kIo, "cannot open " + a.data_.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ArchiveEntry e{j.at("sid").get<std::string>(), j.at("offset").get<std::uint64_t>(),
                     j.at("rows").get<std::uint32_t>(), j.at("cols").get<std::uint32_t>()};
      if (a.cols_ == 0) a.cols_ = e.cols;
      if (!a.by_key_.emplace(e.sid, a.entries_.size()).second) {
        throw Error(Errc::kMalformedInput,
                    io::location(index_path, line_no) + ": duplicate key " + e.sid);
      }
      a.entries_.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::kMalformedInput,
                  io::location(index_path, line_no) + ": " + ex.what());
    }
  }
  return a;
}

bool EmbeddingArchive::contains(std::string_view key) const {
  return by_key_.contains(std::string(key));
}

std::shared_ptr<const StateMatrix> EmbeddingArchive::load(std::string_view key) const {
  auto it = by_key_.find(std::string(key));
  if (it == by_key_.end()) {
    throw Error(Errc::kMissingSid, "no archived states for " + std::string(key));
  }
  const ArchiveEntry& e = entries_[it->second];
  auto m = std::make_shared<StateMatrix>(e.rows, e.cols);
  std::ifstream in(data_, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(e.offset));
  in.read(reinterpret_cast<char*>(m->data()),
          static_cast<std::streamsize>(sizeof(float) * e.rows * e.cols));
  if (!in) throw Error(Errc::kIo, "short read in " + data_.string());
  return m;
}

void EmbeddingArchive::verify() const {
  std::uint64_t expected = 0;
  for (const auto& e : entries_) {
    if (e.cols != cols_) {
      throw Error(Errc::kMalformedInput, "mixed widths in archive at " + e.sid);
    }
    if (e.offset != expected) {
      throw Error(Errc::kMalformedInput, "non-contiguous offset at " + e.sid);
    }
    expected += std::uint64_t{4} * e.rows * e.cols;
  }
  const auto size = std::filesystem::file_size(data_);
  if (size != expected) {
    throw Error(Errc::kMalformedInput,
                "archive data is " + std::to_string(size) + " bytes, index implies " +
                    std::to_string(expected));
  }
}

ArchiveWriter::ArchiveWriter(const std::filesystem::path& prefix)
    : index_(io::open_output(archive_index_path(prefix))),
      data_(io::open_output(archive_data_path(prefix))) {}

void ArchiveWriter::add(std::string_view key, const StateMatrix& states) {
  nlohmann::json j{{"sid", key},
                   {"offset", offset_},
                   {"rows", states.rows()},
                   {"cols", states.cols()}};
  index_ << j.dump() << '\n';
  const auto bytes = static_cast<std::streamsize>(sizeof(float) * states.size());
  data_.write(reinterpret_cast<const char*>(states.data()), bytes);
  offset_ += static_cast<std::uint64_t>(bytes);
}

void ArchiveWriter::close() {
  index_.close();
  data_.close();
  if (!index_ || !data_) throw Error(Errc::kIo, "archive write failed");
}

void write_stub_archive(const std::filesystem::path& prefix,
                        std::span<const StubRequest> requests, std::uint32_t cols,
                        std::uint64_t seed) {
  ArchiveWriter writer(prefix);
  for (const auto& r : requests) {
    std::mt19937_64 rng(text::derive_seed(seed, r.key));
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    StateMatrix m(r.rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
    writer.add(r.key, m);
  }
  writer.close();
}

}  // namespace bagforge
