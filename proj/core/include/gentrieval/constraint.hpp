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

/// \file constraint.hpp
/// Constrained-decoding automata over a DocIdIndex.
///
///   trie      accepts exactly the record token sequences (prefix-trie decoding)
///   fm_index  accepts any non-empty suffix of a record; the matching window
///             is tracked with backward search over the reversed SEP-joined
///             identifier text, so decoding may start inside an identifier
///   term_set  accepts any ordering of a record's term multiset; the live
///             candidate set shrinks by postings intersection
///
/// Automata are immutable after construction; states are small values owned
/// by the caller.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "gentrieval/corpus.hpp"
#include "gentrieval/docid.hpp"

namespace gentrieval {

enum class Strategy { kTrie, kFmIndex, kTermSet };

std::string_view to_string(Strategy strategy) noexcept;
/// Accepts "trie", "fm", "fm_index", "termset", "term_set".
Strategy parse_strategy(std::string_view name);

struct TrieState {
  std::uint32_t node = 0;
  bool operator==(const TrieState&) const = default;
};

struct FmState {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  std::uint32_t length = 0;
  bool operator==(const FmState&) const = default;
};

struct TermSetState {
  TokenSeq generated;               // sorted multiset
  std::vector<std::uint32_t> live;  // sorted record ids
  bool operator==(const TermSetState&) const = default;
};

using AutomatonState = std::variant<TrieState, FmState, TermSetState>;

struct AllowedSet {
  std::vector<TokenId> tokens;  // ascending, never SEP or END
  bool end_allowed = false;
};

class ConstraintAutomaton {
 public:
  virtual ~ConstraintAutomaton() = default;

  virtual Strategy strategy() const noexcept = 0;
  virtual AutomatonState start() const = 0;
  /// Errors: kInvalidState.
  virtual AllowedSet allowed(const AutomatonState& state) const = 0;
  /// Errors: kInvalidState, kIllegalTransition.
  virtual AutomatonState step(const AutomatonState& state, TokenId token) const = 0;
  /// Record positions accepted at `state`. Errors: kNotTerminal.
  virtual std::vector<std::size_t> complete(const AutomatonState& state) const = 0;

  const DocIdIndex& index() const noexcept { return *index_; }
  const std::shared_ptr<const DocIdIndex>& index_ptr() const noexcept { return index_; }

 protected:
  explicit ConstraintAutomaton(std::shared_ptr<const DocIdIndex> index);

 private:
  std::shared_ptr<const DocIdIndex> index_;
};

/// Errors: kEmptyIndex.
std::unique_ptr<ConstraintAutomaton> build_automaton(Strategy strategy,
                                                     std::shared_ptr<const DocIdIndex> index);

class TrieAutomaton final : public ConstraintAutomaton {
 public:
  explicit TrieAutomaton(std::shared_ptr<const DocIdIndex> index);

  Strategy strategy() const noexcept override { return Strategy::kTrie; }
  AutomatonState start() const override { return TrieState{0}; }
  AllowedSet allowed(const AutomatonState& state) const override;
  AutomatonState step(const AutomatonState& state, TokenId token) const override;
  std::vector<std::size_t> complete(const AutomatonState& state) const override;

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::vector<std::pair<TokenId, std::uint32_t>> children;  // sorted by token
    std::vector<std::size_t> terminal;
  };
  const Node& node_of(const AutomatonState& state) const;

  std::vector<Node> nodes_;
};

/// FM-index over SEP ‖ seq_1 ‖ SEP ‖ ... ‖ seq_n ‖ SEP. Built on the reversed
/// text so that appending a token to the forward pattern is one backward
/// search step. Occurrence ranks come from per-symbol sorted BWT positions.
class FmIndex {
 public:
  struct Range {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    std::uint32_t size() const noexcept { return hi - lo; }
    bool empty() const noexcept { return hi <= lo; }
  };

  explicit FmIndex(std::span<const std::span<const TokenId>> sequences);

  Range full() const noexcept { return {0, static_cast<std::uint32_t>(bwt_.size())}; }
  /// Range of pattern ‖ token given the range of pattern.
  Range extend(Range range, TokenId token) const;
  Range find(std::span<const TokenId> pattern) const;
  std::size_t count(std::span<const TokenId> pattern) const { return find(pattern).size(); }

  /// Distinct tokens that follow an occurrence in `range`, SEP excluded.
  std::vector<TokenId> followers(Range range) const;
  bool followed_by_sep(Range range) const;
  /// Sequence ids with an occurrence in `range` that ends the sequence.
  std::vector<std::size_t> sequences_ending_with(Range range) const;

  const TokenSeq& text() const noexcept { return text_; }

 private:
  std::size_t occ(TokenId symbol, std::uint32_t i) const;

  TokenSeq text_;                              // forward SEP-joined text
  std::vector<std::int32_t> sequence_of_;      // text position -> sequence id or -1
  std::vector<std::uint32_t> suffix_array_;    // over reversed text + sentinel
  std::vector<TokenId> bwt_;                   // kSentinel for the '$' row
  std::vector<std::uint32_t> first_row_;       // C array, indexed by symbol
  std::vector<std::vector<std::uint32_t>> positions_;  // symbol -> sorted BWT rows
  std::vector<TokenId> all_followers_;
};

class FmIndexAutomaton final : public ConstraintAutomaton {
 public:
  explicit FmIndexAutomaton(std::shared_ptr<const DocIdIndex> index);

  Strategy strategy() const noexcept override { return Strategy::kFmIndex; }
  AutomatonState start() const override;
  AllowedSet allowed(const AutomatonState& state) const override;
  AutomatonState step(const AutomatonState& state, TokenId token) const override;
  std::vector<std::size_t> complete(const AutomatonState& state) const override;

  const FmIndex& fm_index() const noexcept { return fm_; }

 private:
  const FmState& state_of(const AutomatonState& state) const;

  FmIndex fm_;
};

class TermSetAutomaton final : public ConstraintAutomaton {
 public:
  struct Posting {
    std::uint32_t record;
    std::uint32_t count;
  };

  explicit TermSetAutomaton(std::shared_ptr<const DocIdIndex> index);

  Strategy strategy() const noexcept override { return Strategy::kTermSet; }
  AutomatonState start() const override;
  AllowedSet allowed(const AutomatonState& state) const override;
  AutomatonState step(const AutomatonState& state, TokenId token) const override;
  std::vector<std::size_t> complete(const AutomatonState& state) const override;

  std::span<const Posting> postings(TokenId term) const;

 private:
  const TermSetState& state_of(const AutomatonState& state) const;

  std::vector<TokenSeq> multisets_;  // per record, sorted
  std::unordered_map<TokenId, std::vector<Posting>> postings_;
};

}  // namespace gentrieval
