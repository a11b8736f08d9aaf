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
#include <numeric>

#include "gentrieval/constraint.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

constexpr TokenId kSentinel = 0xFFFFFFFFu;

// Prefix doubling, O(n log^2 n). `s` must end with a unique smallest symbol.
std::vector<std::uint32_t> build_suffix_array(const std::vector<std::uint32_t>& s) {
  const std::size_t n = s.size();
  std::vector<std::uint32_t> sa(n);
  std::iota(sa.begin(), sa.end(), 0u);
  std::vector<std::int64_t> rank(s.begin(), s.end());
  std::vector<std::int64_t> next_rank(n);
  for (std::size_t k = 1;; k <<= 1) {
    auto key = [&](std::uint32_t i) {
      return std::pair<std::int64_t, std::int64_t>(
          rank[i], i + k < n ? rank[i + k] : std::int64_t{-1});
    };
    std::sort(sa.begin(), sa.end(), [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });
    next_rank[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      next_rank[sa[i]] = next_rank[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
    }
    rank.swap(next_rank);
    if (rank[sa[n - 1]] == static_cast<std::int64_t>(n - 1) || k >= n) break;
  }
  return sa;
}

}  // namespace

FmIndex::FmIndex(std::span<const std::span<const TokenId>> sequences) {
  text_.push_back(kSepToken);
  sequence_of_.push_back(-1);
  TokenId max_symbol = kSepToken;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    for (TokenId t : sequences[s]) {
      if (t == kSepToken || t == kEndToken || t == kSentinel) {
        throw Error(Errc::kMalformedRecord, "identifier contains a reserved token");
      }
      text_.push_back(t);
      sequence_of_.push_back(static_cast<std::int32_t>(s));
      max_symbol = std::max(max_symbol, t);
    }
    text_.push_back(kSepToken);
    sequence_of_.push_back(-1);
  }

  // Reversed text plus sentinel; symbols shifted by one so the sentinel is 0.
  const std::size_t m = text_.size();
  std::vector<std::uint32_t> shifted(m + 1);
  for (std::size_t i = 0; i < m; ++i) shifted[i] = text_[m - 1 - i] + 1;
  shifted[m] = 0;
  suffix_array_ = build_suffix_array(shifted);

  bwt_.resize(m + 1);
  positions_.assign(static_cast<std::size_t>(max_symbol) + 1, {});
  for (std::size_t row = 0; row <= m; ++row) {
    const std::uint32_t p = suffix_array_[row];
    if (p == 0) {
      bwt_[row] = kSentinel;
    } else {
      bwt_[row] = shifted[p - 1] - 1;
      positions_[bwt_[row]].push_back(static_cast<std::uint32_t>(row));
    }
  }

  first_row_.assign(positions_.size() + 1, 0);
  std::uint32_t acc = 1;  // the sentinel row sorts first
  for (std::size_t c = 0; c < positions_.size(); ++c) {
    first_row_[c] = acc;
    acc += static_cast<std::uint32_t>(positions_[c].size());
  }
  first_row_[positions_.size()] = acc;

  for (std::size_t c = 0; c < positions_.size(); ++c) {
    if (c != kSepToken && !positions_[c].empty()) all_followers_.push_back(static_cast<TokenId>(c));
  }
}

std::size_t FmIndex::occ(TokenId symbol, std::uint32_t i) const {
  const auto& rows = positions_[symbol];
  return static_cast<std::size_t>(std::lower_bound(rows.begin(), rows.end(), i) - rows.begin());
}

FmIndex::Range FmIndex::extend(Range range, TokenId token) const {
  if (token >= positions_.size() || range.empty()) return {0, 0};
  const std::uint32_t base = first_row_[token];
  return {static_cast<std::uint32_t>(base + occ(token, range.lo)),
          static_cast<std::uint32_t>(base + occ(token, range.hi))};
}

FmIndex::Range FmIndex::find(std::span<const TokenId> pattern) const {
  Range r = full();
  for (TokenId t : pattern) {
    r = extend(r, t);
    if (r.empty()) return {0, 0};
  }
  return r;
}

std::vector<TokenId> FmIndex::followers(Range range) const {
  if (range.lo == 0 && range.hi == bwt_.size()) return all_followers_;
  std::vector<TokenId> out;
  for (std::uint32_t row = range.lo; row < range.hi; ++row) {
    const TokenId t = bwt_[row];
    if (t != kSepToken && t != kSentinel) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool FmIndex::followed_by_sep(Range range) const {
  if (range.empty()) return false;
  return occ(kSepToken, range.hi) > occ(kSepToken, range.lo);
}

std::vector<std::size_t> FmIndex::sequences_ending_with(Range range) const {
  std::vector<std::size_t> out;
  if (range.empty()) return out;
  const auto& rows = positions_[kSepToken];
  const std::size_t m = text_.size();
  for (auto it = std::lower_bound(rows.begin(), rows.end(), range.lo);
       it != rows.end() && *it < range.hi; ++it) {
    const std::uint32_t p = suffix_array_[*it];
    const std::int32_t seq = sequence_of_[m - 1 - p];
    if (seq >= 0) out.push_back(static_cast<std::size_t>(seq));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace gentrieval
