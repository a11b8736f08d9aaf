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

#include "gentrieval/error.hpp"

namespace gentrieval {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::kMalformedRecord: return "malformed_record";
    case Errc::kDuplicateKey: return "duplicate_key";
    case Errc::kIo: return "io";
    case Errc::kVocabularyFrozen: return "vocabulary_frozen";
    case Errc::kEmptyDocument: return "empty_document";
    case Errc::kDegenerateInput: return "degenerate_input";
    case Errc::kUnknownDoc: return "unknown_doc";
    case Errc::kNotSupported: return "not_supported";
    case Errc::kUnknownToken: return "unknown_token";
    case Errc::kRemoteUnavailable: return "remote_unavailable";
    case Errc::kTimeout: return "timeout";
    case Errc::kMissingEnd: return "missing_end";
    case Errc::kEmptyIndex: return "empty_index";
    case Errc::kInvalidState: return "invalid_state";
    case Errc::kIllegalTransition: return "illegal_transition";
    case Errc::kNotTerminal: return "not_terminal";
    case Errc::kNoValidPath: return "no_valid_path";
    case Errc::kModelFailure: return "model_failure";
    case Errc::kEmptyQuery: return "empty_query";
    case Errc::kEmptyRuns: return "empty_runs";
    case Errc::kConfig: return "config";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace gentrieval
