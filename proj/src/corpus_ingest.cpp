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

#include <optional>

#include "bagforge/error.hpp"
#include "bagforge/parallel.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

void FilterStats::count(SentenceVerdict v) {
  ++input;
  switch (v) {
    case SentenceVerdict::kKept: ++kept; break;
    case SentenceVerdict::kTooShort: ++too_short; break;
    case SentenceVerdict::kTooLong: ++too_long; break;
    case SentenceVerdict::kDuplicate: ++duplicate; break;
    case SentenceVerdict::kEncodingError: ++encoding_error; break;
  }
}

nlohmann::json FilterStats::to_json() const {
  return {{"input", input},
          {"kept", kept},
          {"rejected",
           {{"too_short", too_short},
            {"too_long", too_long},
            {"duplicate", duplicate},
            {"encoding_error", encoding_error}}}};
}

struct SentenceFilter::Prepared {
  SentenceVerdict verdict = SentenceVerdict::kKept;
  RawSentence sentence;
  text::Hash128 hash;
};

SentenceFilter::Prepared SentenceFilter::prepare(const InputLine& line) const {
  Prepared p;
  std::string_view content = line.content;
  if (!content.empty() && content.back() == '\r') content.remove_suffix(1);
  std::string_view raw_text = content;
  if (const auto tab = content.find('\t'); tab != std::string_view::npos) {
    p.sentence.sid = std::string(content.substr(0, tab));
    raw_text = content.substr(tab + 1);
  } else {
    p.sentence.sid = "L" + std::to_string(line.line_no);
  }
  auto normalized = text::try_normalize(raw_text);
  if (!normalized || !text::is_valid_utf8(p.sentence.sid)) {
    p.verdict = SentenceVerdict::kEncodingError;
    return p;
  }
  const std::size_t len = text::char_length(*normalized);
  if (len < config_.min_chars) {
    p.verdict = SentenceVerdict::kTooShort;
  } else if (len > config_.max_chars) {
    p.verdict = SentenceVerdict::kTooLong;
  } else {
    p.hash = text::content_hash(*normalized);
    p.sentence.text = *std::move(normalized);
  }
  return p;
}

std::vector<RawSentence> SentenceFilter::commit(
    std::vector<Prepared>& prepared) {
  std::vector<RawSentence> kept;
  for (auto& p : prepared) {
    if (p.verdict == SentenceVerdict::kKept) {
      if (seen_texts_.contains(p.hash) ||
          seen_sids_.contains(p.sentence.sid)) {
        p.verdict = SentenceVerdict::kDuplicate;
      } else {
        seen_texts_.insert(p.hash);
        seen_sids_.insert(p.sentence.sid);
        kept.push_back(std::move(p.sentence));
      }
    }
    stats_.count(p.verdict);
  }
  return kept;
}

std::vector<RawSentence> SentenceFilter::feed_serial(
    const std::vector<InputLine>& batch) {
  std::vector<Prepared> prepared;
  prepared.reserve(batch.size());
  for (const auto& line : batch) prepared.push_back(prepare(line));
  return commit(prepared);
}

std::vector<RawSentence> SentenceFilter::feed(
    const std::vector<InputLine>& batch, int workers) {
  std::vector<Prepared> prepared(batch.size());
  const auto n = static_cast<std::int64_t>(batch.size());
#pragma omp parallel for schedule(dynamic, 256) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    prepared[static_cast<std::size_t>(i)] =
        prepare(batch[static_cast<std::size_t>(i)]);
  }
  return commit(prepared);
}

FilterStats filter_sentences(std::istream& in, std::ostream& out,
                             const FilterConfig& config, int workers) {
  constexpr std::size_t kBatch = 1 << 16;
  SentenceFilter filter(config);
  std::vector<InputLine> batch;
  batch.reserve(kBatch);
  std::string line;
  std::size_t line_no = 0;

  const auto flush = [&] {
    for (const auto& s : filter.feed(batch, workers)) {
      out << s.sid << '\t' << s.text << '\n';
    }
    batch.clear();
  };
  while (std::getline(in, line)) {
    batch.push_back({++line_no, std::move(line)});
    if (batch.size() == kBatch) flush();
  }
  flush();
  return filter.stats();
}

std::vector<RawSentence> read_sentences(std::istream& in) {
  std::vector<RawSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(Errc::kMalformedInput,
                  "sentences line " + std::to_string(line_no) +
                      ": expected sid<TAB>text");
    }
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

}  // namespace bagforge
