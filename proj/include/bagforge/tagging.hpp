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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bagforge/group_linker.hpp"
#include "bagforge/kb_store.hpp"

namespace bagforge {

enum class TaggingScheme { kSTag, kSTagExpRels, kKTag };

std::string_view scheme_name(TaggingScheme scheme);
TaggingScheme parse_scheme(std::string_view name);  // "s-tag", "s-tag+exprels", "k-tag"

inline constexpr std::string_view kStartToken = "[CLS]";
inline constexpr std::string_view kEndToken = "[SEP]";
inline constexpr std::string_view kFirstMarker = "$";
inline constexpr std::string_view kSecondMarker = "^";

struct Token {
  std::string text;
  std::size_t begin = 0;  // character offsets into the source text
  std::size_t end = 0;
  bool space_before = false;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
};

// Whitespace split, then leading and trailing punctuation peeled off as
// single-character tokens.
class DefaultTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
};

// Inclusive token-index span [first, last].
struct TokenSpan {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t length() const { return last - first + 1; }
  bool operator==(const TokenSpan&) const = default;
};

// Tokens run from the start sentinel (index 0) to the end sentinel. "$"
// markers surround `head_span` and "^" markers surround `tail_span`:
//  - KTag: head_span is the KB head, tail_span the KB tail.
//  - STag variants: head_span is the first-appearing entity, tail_span the
//    second; e1_is_head records whether the first one is the KB head.
// Spans never include the markers.
struct TaggedSentence {
  std::string sid;
  Group group;
  Polarity polarity = Polarity::kPositive;
  TaggingScheme scheme = TaggingScheme::kKTag;
  std::vector<std::string> tokens;
  std::vector<bool> space_before;
  TokenSpan head_span;
  TokenSpan tail_span;
  bool e1_is_head = true;

  // Entity that the "$" markers delimit.
  EntityId dollar_entity() const {
    if (scheme == TaggingScheme::kKTag || e1_is_head) return group.head;
    return group.tail;
  }
  bool operator==(const TaggedSentence&) const = default;
};

using TaggedSentencePtr = std::shared_ptr<const TaggedSentence>;

// Throws kOverlappingSpans or kSpanMisaligned.
TaggedSentence tag_sentence(const SentenceGroupMatch& match,
                            std::string_view text, const Tokenizer& tokenizer,
                            TaggingScheme scheme);

// Drops sentinels and markers and rejoins with the recorded spacing.
std::string detokenize(const TaggedSentence& tagged);

// Maps base relations to direction-specific classes. NA stays one class;
// r becomes r(e1,e2) at 2r-1 and r(e2,e1) at 2r.
class LabelMapper {
 public:
  LabelMapper() = default;
  explicit LabelMapper(std::size_t base_size) : base_size_(base_size) {}

  RelationId expand(RelationId base, bool e1_is_head) const;
  RelationId base_of(RelationId expanded) const;
  bool is_forward(RelationId expanded) const;  // r(e1,e2)
  std::size_t expanded_size() const {
    return base_size_ == 0 ? 0 : 2 * (base_size_ - 1) + 1;
  }

 private:
  std::size_t base_size_ = 0;
};

struct ExpandedVocab {
  RelationVocab vocab;
  LabelMapper mapper;
};

ExpandedVocab expand_relation_labels(const RelationVocab& vocab);

}  // namespace bagforge
