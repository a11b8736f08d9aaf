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

#include <cctype>

#include "gentrieval/corpus.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

// Length in bytes of a UTF-8 encoded whitespace code point starting at `i`,
// or 0. ASCII whitespace is handled separately.
std::size_t unicode_space_length(std::string_view s, std::size_t i) {
  const auto byte = [&](std::size_t k) {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u;
  };
  const unsigned b0 = byte(0);
  if (b0 == 0xC2 && (byte(1) == 0x85 || byte(1) == 0xA0)) return 2;  // NEL, NBSP
  if (b0 == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;    // U+1680
  if (b0 == 0xE2 && byte(1) == 0x80) {
    const unsigned b2 = byte(2);
    if (b2 >= 0x80 && b2 <= 0x8A) return 3;                           // U+2000..200A
    if (b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF) return 3;             // U+2028/2029/202F
  }
  if (b0 == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;    // U+205F
  if (b0 == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;    // U+3000
  return 0;
}

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::vector<WordPiece> split_words(std::string_view text,
                                   const TokenizerOptions& options) {
  std::vector<WordPiece> pieces;
  std::string current;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (!current.empty()) {
      pieces.push_back({std::move(current), start, end});
      current.clear();
    }
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_ascii_space(c)) {
      flush(i);
      ++i;
      continue;
    }
    if (c >= 0x80) {
      if (const std::size_t n = unicode_space_length(text, i); n > 0) {
        flush(i);
        i += n;
        continue;
      }
      if (current.empty()) start = i;
      current.push_back(static_cast<char>(c));
      ++i;
      continue;
    }
    if (c == '-' && options.split_hyphen) {
      flush(i);
      ++i;
      continue;
    }
    if (std::ispunct(c) && c != '-') {
      flush(i);
      pieces.push_back({std::string(1, static_cast<char>(c)), i, i + 1});
      ++i;
      continue;
    }
    if (current.empty()) start = i;
    current.push_back(static_cast<char>(std::tolower(c)));
    ++i;
  }
  flush(text.size());
  return pieces;
}

std::string normalize_text(std::string_view text, const TokenizerOptions& options) {
  std::string out;
  for (const auto& piece : split_words(text, options)) {
    if (!out.empty()) out.push_back(' ');
    out += piece.word;
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (std::string_view w : {kEndWord, kSepWord, kUnkWord}) {
    ids_.emplace(std::string(w), static_cast<TokenId>(words_.size()));
    words_.emplace_back(w);
  }
}

TokenId Vocabulary::add(std::string_view word) {
  if (auto it = ids_.find(std::string(word)); it != ids_.end()) return it->second;
  if (frozen_) {
    throw Error(Errc::kVocabularyFrozen,
                "word '" + std::string(word) + "' is not in the frozen vocabulary");
  }
  const auto id = static_cast<TokenId>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  if (auto it = ids_.find(std::string(word)); it != ids_.end()) return it->second;
  return std::nullopt;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id >= words_.size()) {
    throw Error(Errc::kUnknownToken, "token id " + std::to_string(id) + " out of range");
  }
  return words_[id];
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  if (words.size() < kReservedTokens || words[kEndToken] != kEndWord ||
      words[kSepToken] != kSepWord || words[kUnkToken] != kUnkWord) {
    throw Error(Errc::kMalformedRecord, "vocabulary does not start with the reserved tokens");
  }
  Vocabulary vocab;
  for (std::size_t i = kReservedTokens; i < words.size(); ++i) {
    if (vocab.add(words[i]) != i) {
      throw Error(Errc::kMalformedRecord, "duplicate vocabulary entry '" + words[i] + "'");
    }
  }
  return vocab;
}

TokenSeq tokenize(Vocabulary& vocab, std::string_view text, const TokenizerOptions& options) {
  TokenSeq out;
  for (const auto& piece : split_words(text, options)) out.push_back(vocab.add(piece.word));
  return out;
}

TokenSeq tokenize(const Vocabulary& vocab, std::string_view text,
                  const TokenizerOptions& options) {
  TokenSeq out;
  for (const auto& piece : split_words(text, options)) {
    auto id = vocab.find(piece.word);
    if (!id) {
      throw Error(Errc::kVocabularyFrozen,
                  "word '" + piece.word + "' is not in the frozen vocabulary");
    }
    out.push_back(*id);
  }
  return out;
}

TokenSeq tokenize_lenient(const Vocabulary& vocab, std::string_view text,
                          const TokenizerOptions& options) {
  TokenSeq out;
  for (const auto& piece : split_words(text, options)) {
    out.push_back(vocab.find(piece.word).value_or(kUnkToken));
  }
  return out;
}

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> tokens) {
  std::string out;
  for (TokenId t : tokens) {
    if (t == kEndToken) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.word(t);
  }
  return out;
}

}  // namespace gentrieval
