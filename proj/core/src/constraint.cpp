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

#include <algorithm>

#include "gentrieval/constraint.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

std::string_view to_string(Strategy strategy) noexcept {
  switch (strategy) {
    case Strategy::kTrie: return "trie";
    case Strategy::kFmIndex: return "fm_index";
    case Strategy::kTermSet: return "term_set";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "trie") return Strategy::kTrie;
  if (name == "fm" || name == "fm_index") return Strategy::kFmIndex;
  if (name == "termset" || name == "term_set") return Strategy::kTermSet;
  throw Error(Errc::kConfig, "unknown strategy '" + std::string(name) + "'");
}

ConstraintAutomaton::ConstraintAutomaton(std::shared_ptr<const DocIdIndex> index)
    : index_(std::move(index)) {
  if (!index_ || index_->empty()) throw Error(Errc::kEmptyIndex, "docid index has no records");
}

std::unique_ptr<ConstraintAutomaton> build_automaton(Strategy strategy,
                                                     std::shared_ptr<const DocIdIndex> index) {
  switch (strategy) {
    case Strategy::kTrie: return std::make_unique<TrieAutomaton>(std::move(index));
    case Strategy::kFmIndex: return std::make_unique<FmIndexAutomaton>(std::move(index));
    case Strategy::kTermSet: return std::make_unique<TermSetAutomaton>(std::move(index));
  }
  throw Error(Errc::kConfig, "unknown strategy");
}

// ---- trie ----

TrieAutomaton::TrieAutomaton(std::shared_ptr<const DocIdIndex> index)
    : ConstraintAutomaton(std::move(index)) {
  nodes_.emplace_back();
  const auto& records = this->index().records();
  for (std::size_t r = 0; r < records.size(); ++r) {
    std::uint32_t node = 0;
    for (TokenId t : records[r].body()) {
      auto& children = nodes_[node].children;
      auto it = std::lower_bound(children.begin(), children.end(), t,
                                 [](const auto& child, TokenId v) { return child.first < v; });
      if (it != children.end() && it->first == t) {
        node = it->second;
        continue;
      }
      const auto next = static_cast<std::uint32_t>(nodes_.size());
      children.insert(it, {t, next});
      nodes_.emplace_back();
      node = next;
    }
    nodes_[node].terminal.push_back(r);
  }
}

const TrieAutomaton::Node& TrieAutomaton::node_of(const AutomatonState& state) const {
  const auto* s = std::get_if<TrieState>(&state);
  if (s == nullptr || s->node >= nodes_.size()) {
    throw Error(Errc::kInvalidState, "not a trie state of this automaton");
  }
  return nodes_[s->node];
}

AllowedSet TrieAutomaton::allowed(const AutomatonState& state) const {
  const Node& node = node_of(state);
  AllowedSet out;
  out.tokens.reserve(node.children.size());
  for (const auto& [token, child] : node.children) out.tokens.push_back(token);
  out.end_allowed = !node.terminal.empty();
  return out;
}

AutomatonState TrieAutomaton::step(const AutomatonState& state, TokenId token) const {
  const Node& node = node_of(state);
  auto it = std::lower_bound(node.children.begin(), node.children.end(), token,
                             [](const auto& child, TokenId v) { return child.first < v; });
  if (it == node.children.end() || it->first != token) {
    throw Error(Errc::kIllegalTransition, "token " + std::to_string(token) + " not allowed here");
  }
  return TrieState{it->second};
}

std::vector<std::size_t> TrieAutomaton::complete(const AutomatonState& state) const {
  const Node& node = node_of(state);
  if (node.terminal.empty()) throw Error(Errc::kNotTerminal, "no record ends here");
  return node.terminal;
}

// ---- FM-index ----

namespace {

FmIndex fm_over(const DocIdIndex& index) {
  std::vector<std::span<const TokenId>> bodies;
  bodies.reserve(index.size());
  for (const auto& record : index.records()) bodies.push_back(record.body());
  return FmIndex(bodies);
}

}  // namespace

FmIndexAutomaton::FmIndexAutomaton(std::shared_ptr<const DocIdIndex> index)
    : ConstraintAutomaton(std::move(index)), fm_(fm_over(this->index())) {}

AutomatonState FmIndexAutomaton::start() const {
  const auto full = fm_.full();
  return FmState{full.lo, full.hi, 0};
}

const FmState& FmIndexAutomaton::state_of(const AutomatonState& state) const {
  const auto* s = std::get_if<FmState>(&state);
  if (s == nullptr || s->hi > fm_.full().hi || s->hi <= s->lo) {
    throw Error(Errc::kInvalidState, "not an fm_index state of this automaton");
  }
  return *s;
}

AllowedSet FmIndexAutomaton::allowed(const AutomatonState& state) const {
  const FmState& s = state_of(state);
  const FmIndex::Range range{s.lo, s.hi};
  AllowedSet out;
  out.tokens = fm_.followers(range);
  out.end_allowed = s.length > 0 && fm_.followed_by_sep(range);
  return out;
}

AutomatonState FmIndexAutomaton::step(const AutomatonState& state, TokenId token) const {
  const FmState& s = state_of(state);
  if (token == kSepToken || token == kEndToken) {
    throw Error(Errc::kIllegalTransition, "reserved token cannot extend the window");
  }
  const auto next = fm_.extend({s.lo, s.hi}, token);
  if (next.empty()) {
    throw Error(Errc::kIllegalTransition, "token " + std::to_string(token) + " has no occurrence");
  }
  return FmState{next.lo, next.hi, s.length + 1};
}

std::vector<std::size_t> FmIndexAutomaton::complete(const AutomatonState& state) const {
  const FmState& s = state_of(state);
  if (s.length == 0) throw Error(Errc::kNotTerminal, "empty window");
  auto out = fm_.sequences_ending_with({s.lo, s.hi});
  if (out.empty()) throw Error(Errc::kNotTerminal, "window does not end any identifier");
  return out;
}

// ---- term set ----

TermSetAutomaton::TermSetAutomaton(std::shared_ptr<const DocIdIndex> index)
    : ConstraintAutomaton(std::move(index)) {
  const auto& records = this->index().records();
  multisets_.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto body = records[r].body();
    TokenSeq terms(body.begin(), body.end());
    std::sort(terms.begin(), terms.end());
    for (std::size_t i = 0; i < terms.size();) {
      std::size_t j = i;
      while (j < terms.size() && terms[j] == terms[i]) ++j;
      postings_[terms[i]].push_back(
          {static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(j - i)});
      i = j;
    }
    multisets_.push_back(std::move(terms));
  }
}

AutomatonState TermSetAutomaton::start() const {
  TermSetState s;
  s.live.resize(multisets_.size());
  for (std::uint32_t r = 0; r < s.live.size(); ++r) s.live[r] = r;
  return s;
}

std::span<const TermSetAutomaton::Posting> TermSetAutomaton::postings(TokenId term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

const TermSetState& TermSetAutomaton::state_of(const AutomatonState& state) const {
  const auto* s = std::get_if<TermSetState>(&state);
  if (s == nullptr || !std::is_sorted(s->generated.begin(), s->generated.end())) {
    throw Error(Errc::kInvalidState, "not a term_set state of this automaton");
  }
  for (auto r : s->live) {
    if (r >= multisets_.size()) throw Error(Errc::kInvalidState, "live record out of range");
  }
  return *s;
}

AllowedSet TermSetAutomaton::allowed(const AutomatonState& state) const {
  const TermSetState& s = state_of(state);
  AllowedSet out;
  for (auto r : s.live) {
    const TokenSeq& terms = multisets_[r];
    TokenSeq rest;
    std::set_difference(terms.begin(), terms.end(), s.generated.begin(), s.generated.end(),
                        std::back_inserter(rest));
    if (rest.empty()) {
      out.end_allowed = true;
    } else {
      out.tokens.insert(out.tokens.end(), rest.begin(), rest.end());
    }
  }
  std::sort(out.tokens.begin(), out.tokens.end());
  out.tokens.erase(std::unique(out.tokens.begin(), out.tokens.end()), out.tokens.end());
  return out;
}

AutomatonState TermSetAutomaton::step(const AutomatonState& state, TokenId token) const {
  const TermSetState& s = state_of(state);
  const auto needed = static_cast<std::uint32_t>(
      std::count(s.generated.begin(), s.generated.end(), token) + 1);
  TermSetState next;
  next.generated = s.generated;
  next.generated.insert(std::upper_bound(next.generated.begin(), next.generated.end(), token),
                        token);
  // Postings are sorted by record, as is the live set.
  auto live = s.live.begin();
  for (const Posting& p : postings(token)) {
    if (p.count < needed) continue;
    live = std::lower_bound(live, s.live.end(), p.record);
    if (live == s.live.end()) break;
    if (*live == p.record) next.live.push_back(p.record);
  }
  if (next.live.empty()) {
    throw Error(Errc::kIllegalTransition, "token " + std::to_string(token) + " leaves no candidate");
  }
  return next;
}

std::vector<std::size_t> TermSetAutomaton::complete(const AutomatonState& state) const {
  const TermSetState& s = state_of(state);
  std::vector<std::size_t> out;
  for (auto r : s.live) {
    if (multisets_[r] == s.generated) out.push_back(r);
  }
  if (out.empty()) throw Error(Errc::kNotTerminal, "generated terms match no record exactly");
  return out;
}

}  // namespace gentrieval
