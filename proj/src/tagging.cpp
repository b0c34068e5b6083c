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

#include "bagforge/tagging.hpp"

#include <algorithm>

#include "bagforge/error.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

std::string_view scheme_name(TaggingScheme scheme) {
  switch (scheme) {
    case TaggingScheme::kSTag: return "s-tag";
    case TaggingScheme::kSTagExpRels: return "s-tag+exprels";
    case TaggingScheme::kKTag: return "k-tag";
  }
  return "unknown";
}

TaggingScheme parse_scheme(std::string_view name) {
  if (name == "s-tag") return TaggingScheme::kSTag;
  if (name == "s-tag+exprels") return TaggingScheme::kSTagExpRels;
  if (name == "k-tag") return TaggingScheme::kKTag;
  throw Error(Errc::kInvalidConfig, "unknown tagging scheme " + std::string(name));
}

std::vector<Token> DefaultTokenizer::tokenize(std::string_view utf8) const {
  std::vector<Token> out;
  const auto decoded = text::decode_utf8(utf8);
  if (!decoded) throw Error(Errc::kMalformedInput, "invalid UTF-8 sentence");
  const std::u32string& cps = *decoded;

  const auto emit = [&](std::size_t b, std::size_t e, bool space) {
    out.push_back({text::encode_utf8(std::u32string_view(cps).substr(b, e - b)),
                   b, e, space});
  };

  std::size_t i = 0;
  bool space = false;
  while (i < cps.size()) {
    if (text::is_space(cps[i])) {
      space = true;
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < cps.size() && !text::is_space(cps[end])) ++end;

    std::size_t b = i;
    std::size_t e = end;
    while (b < e && text::is_punct(cps[b])) {
      emit(b, b + 1, space && b == i);
      ++b;
    }
    std::size_t trail = e;
    while (trail > b && text::is_punct(cps[trail - 1])) --trail;
    if (b < trail) emit(b, trail, space && b == i);
    for (std::size_t k = trail; k < e; ++k) emit(k, k + 1, false);

    space = false;
    i = end;
  }
  return out;
}

namespace {

TokenSpan align(const std::vector<Token>& tokens, const CharSpan& span) {
  if (span.end <= span.begin) {
    throw Error(Errc::kSpanMisaligned, "empty entity span");
  }
  std::size_t first = tokens.size();
  std::size_t last = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].begin == span.begin) first = i;
    if (tokens[i].end == span.end) last = i;
  }
  if (first == tokens.size() || last == tokens.size() || last < first) {
    throw Error(Errc::kSpanMisaligned,
                "entity span [" + std::to_string(span.begin) + "," +
                    std::to_string(span.end) + ") does not align to tokens");
  }
  return {first, last};
}

}  // namespace

TaggedSentence tag_sentence(const SentenceGroupMatch& match,
                            std::string_view text, const Tokenizer& tokenizer,
                            TaggingScheme scheme) {
  if (match.head_span.overlaps(match.tail_span) ||
      match.head_span == match.tail_span) {
    throw Error(Errc::kOverlappingSpans, "head and tail spans overlap");
  }
  const auto tokens = tokenizer.tokenize(text);
  const TokenSpan head = align(tokens, match.head_span);
  const TokenSpan tail = align(tokens, match.tail_span);
  const bool e1_is_head = head.first < tail.first;

  const bool kb_order = scheme == TaggingScheme::kKTag;
  const TokenSpan dollar = kb_order ? head : (e1_is_head ? head : tail);
  const TokenSpan caret = kb_order ? tail : (e1_is_head ? tail : head);

  TaggedSentence out;
  out.sid = match.sid;
  out.group = match.group;
  out.polarity = match.polarity;
  out.scheme = scheme;
  out.e1_is_head = e1_is_head;
  out.tokens.reserve(tokens.size() + 6);

  const auto push = [&](std::string_view tok, bool space) {
    out.tokens.emplace_back(tok);
    out.space_before.push_back(space);
  };
  push(kStartToken, false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == dollar.first) {
      push(kFirstMarker, tokens[i].space_before);
      out.head_span.first = out.tokens.size();
    }
    if (i == caret.first) {
      push(kSecondMarker, tokens[i].space_before);
      out.tail_span.first = out.tokens.size();
    }
    push(tokens[i].text, tokens[i].space_before);
    if (i == dollar.last) {
      out.head_span.last = out.tokens.size() - 1;
      push(kFirstMarker, false);
    }
    if (i == caret.last) {
      out.tail_span.last = out.tokens.size() - 1;
      push(kSecondMarker, false);
    }
  }
  push(kEndToken, false);
  return out;
}

std::string detokenize(const TaggedSentence& tagged) {
  std::vector<bool> skip(tagged.tokens.size(), false);
  if (!skip.empty()) {
    skip.front() = true;
    skip.back() = true;
  }
  for (const TokenSpan& s : {tagged.head_span, tagged.tail_span}) {
    if (s.first > 0) skip[s.first - 1] = true;
    if (s.last + 1 < skip.size()) skip[s.last + 1] = true;
  }
  std::string out;
  for (std::size_t i = 0; i < tagged.tokens.size(); ++i) {
    if (skip[i]) continue;
    if (!out.empty() && tagged.space_before[i]) out.push_back(' ');
    out += tagged.tokens[i];
  }
  return out;
}

RelationId LabelMapper::expand(RelationId base, bool e1_is_head) const {
  const auto b = to_index(base);
  if (b == 0) return kNA;
  return RelationId{2 * b - 1 + (e1_is_head ? 0u : 1u)};
}

RelationId LabelMapper::base_of(RelationId expanded) const {
  const auto x = to_index(expanded);
  return RelationId{x == 0 ? 0u : (x + 1) / 2};
}

bool LabelMapper::is_forward(RelationId expanded) const {
  return to_index(expanded) % 2 == 1;
}

ExpandedVocab expand_relation_labels(const RelationVocab& vocab) {
  ExpandedVocab out;
  out.mapper = LabelMapper(vocab.size());
  for (std::uint32_t r = 1; r < vocab.size(); ++r) {
    const auto& name = vocab.name(RelationId{r});
    out.vocab.add(name + "(e1,e2)");
    out.vocab.add(name + "(e2,e1)");
  }
  return out;
}

}  // namespace bagforge
