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

/// \file corpus.hpp
/// Documents, queries, the shared vocabulary and the deterministic word-level
/// tokenizer. Everything that maps text to token ids goes through here so the
/// constraint automata and the language models agree on one id space.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gentrieval {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

/// Reserved ids. The tokenizer can never emit them from user text because
/// '<' and '>' are punctuation boundaries.
inline constexpr TokenId kEndToken = 0;
inline constexpr TokenId kSepToken = 1;
inline constexpr TokenId kUnkToken = 2;
inline constexpr std::size_t kReservedTokens = 3;

inline constexpr std::string_view kEndWord = "<end>";
inline constexpr std::string_view kSepWord = "<sep>";
inline constexpr std::string_view kUnkWord = "<unk>";

struct TokenizerOptions {
  bool split_hyphen = true;
};

/// One lowercased word piece together with its byte span in the source text.
struct WordPiece {
  std::string word;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Lowercase and split on (Unicode) whitespace, hyphens and ASCII punctuation.
/// Punctuation characters other than the hyphen become single-char pieces;
/// bytes >= 0x80 that are not whitespace are treated as word characters.
std::vector<WordPiece> split_words(std::string_view text,
                                   const TokenizerOptions& options = {});

/// split_words() joined by single spaces. Used for text comparisons that must
/// not depend on a vocabulary (scripted prompt matching, round-trip checks).
std::string normalize_text(std::string_view text,
                           const TokenizerOptions& options = {});

/// Append-only word <-> id table. Ids are assigned in first-seen order, which
/// makes two builds over the same input produce identical ids.
class Vocabulary {
 public:
  Vocabulary();

  /// Returns the id of `word`, adding it if needed.
  /// Throws Error(kVocabularyFrozen) if the word is new and the table frozen.
  TokenId add(std::string_view word);
  std::optional<TokenId> find(std::string_view word) const;
  const std::string& word(TokenId id) const;

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool contains(TokenId id) const noexcept { return id < words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  static Vocabulary from_words(const std::vector<std::string>& words);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
  bool frozen_ = false;
};

/// Tokenize, growing the vocabulary for unseen words (error when frozen).
TokenSeq tokenize(Vocabulary& vocab, std::string_view text,
                  const TokenizerOptions& options = {});

/// Tokenize against a fixed vocabulary; unseen words raise kVocabularyFrozen.
TokenSeq tokenize(const Vocabulary& vocab, std::string_view text,
                  const TokenizerOptions& options = {});

/// Tokenize against a fixed vocabulary, mapping unseen words to kUnkToken.
/// Prompts and queries go through this path at decode time.
TokenSeq tokenize_lenient(const Vocabulary& vocab, std::string_view text,
                          const TokenizerOptions& options = {});

/// Words joined by single spaces. END is dropped; SEP and UNK print as their
/// reserved names.
std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> tokens);

struct Document {
  std::string doc_key;
  std::string text;
  std::optional<std::string> title;
  std::vector<std::string> pseudo_queries;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  /// Throws kDuplicateKey / kMalformedRecord on invariant violations.
  void add(Document doc);

  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }
  const std::vector<Document>& documents() const noexcept { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  std::optional<std::size_t> position(std::string_view key) const;
  const Document& at(std::string_view key) const;

  auto begin() const { return documents_.begin(); }
  auto end() const { return documents_.end(); }

 private:
  std::vector<Document> documents_;
  std::unordered_map<std::string, std::size_t> by_key_;
};

struct Query {
  std::string query_id;
  std::string text;
  std::set<std::string> relevant_keys;
};

/// One JSON object per line: {"id", "text", "title"?, "pseudo_queries"?}.
/// Blank lines are skipped. Errors: kIo, kMalformedRecord, kDuplicateKey.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view jsonl);

/// One JSON object per line: {"qid", "text", "relevant": [ids]}.
std::vector<Query> load_queries(const std::filesystem::path& path);
std::vector<Query> parse_queries(std::string_view jsonl);

}  // namespace gentrieval
