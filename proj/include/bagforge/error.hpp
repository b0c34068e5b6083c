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

#include <stdexcept>
#include <string>
#include <string_view>

namespace bagforge {

enum class Errc {
  kMalformedInput,
  kUnknownEntity,
  kSelfPair,
  kInvalidConfig,
  kIo,
  kOverlappingSpans,
  kSpanMisaligned,
  kEmptyBag,
  kEmptyTestSet,
  kUnknownGoldGroup,
  kOutOfBounds,
  kNonFiniteLoss,
  kMissingSid,
  kUnderdetermined,
};

std::string_view errc_name(Errc code);

// Validation errors (bad input files, bad config) map to CLI exit status 1;
// everything else is a runtime failure.
bool is_validation_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  Errc code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace bagforge
