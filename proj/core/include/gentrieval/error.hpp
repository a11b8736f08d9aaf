// Copyright 2026 The gentrieval Authors.
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

namespace gentrieval {

enum class Errc {
  kMalformedRecord,
  kDuplicateKey,
  kIo,
  kVocabularyFrozen,
  kEmptyDocument,
  kDegenerateInput,
  kUnknownDoc,
  kNotSupported,
  kUnknownToken,
  kRemoteUnavailable,
  kTimeout,
  kMissingEnd,
  kEmptyIndex,
  kInvalidState,
  kIllegalTransition,
  kNotTerminal,
  kNoValidPath,
  kModelFailure,
  kEmptyQuery,
  kEmptyRuns,
  kConfig,
};

/// Stable snake_case name used in diagnostics ("error: <name>: ...").
std::string_view to_string(Errc code) noexcept;

/// The single exception type thrown by the library. Parse failures of model
/// output are not errors; those are reported through return values.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gentrieval
