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

// Fixtures, test doubles and brute-force oracles shared by the unit and
// acceptance tests. Oracles work from the raw records, never through the
// structures they check.

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gentrieval/constraint.hpp"
#include "gentrieval/corpus.hpp"
#include "gentrieval/docid.hpp"
#include "gentrieval/lm.hpp"

namespace gentrieval::testing {

/// (doc_key, surface) pairs turned into a path-view index. Words of
/// `extra_words` are added to the vocabulary after the surfaces.
std::shared_ptr<const DocIdIndex> index_from_surfaces(
    const std::vector<std::pair<std::string, std::string>>& records,
    const std::vector<std::string>& extra_words = {});

/// d1 food-apple, d2 tech-apple, d3 food-banana.
std::shared_ptr<const DocIdIndex> toy_index();

/// Rules giving P(food)=0.7, P(tech)=0.3, P(apple|food)=0.6,
/// P(banana|food)=0.4, P(apple|tech)=1 and END with certainty after a full
/// identifier, whatever the prompt.
std::string toy_script_json();

/// Dense pseudo-random next-token distributions keyed by (seed, prompt,
/// generated prefix). Deterministic and properly normalized.
class RandomTableModel final : public LanguageModel {
 public:
  RandomTableModel(std::size_t vocab_size, std::uint64_t seed, double spread = 4.0);

  std::string_view kind() const noexcept override { return "random_table"; }
  TokenDistribution next_token_distribution(const LmContext& ctx) const override;
  std::string generate(const GenerationRequest& request) const override;

 private:
  std::size_t vocab_size_;
  std::uint64_t seed_;
  double spread_;
};

/// Forwards to another model and counts generate() calls.
class CountingModel final : public LanguageModel {
 public:
  explicit CountingModel(const LanguageModel& inner) : inner_(inner) {}

  std::string_view kind() const noexcept override { return inner_.kind(); }
  TokenDistribution next_token_distribution(const LmContext& ctx) const override {
    return inner_.next_token_distribution(ctx);
  }
  std::string generate(const GenerationRequest& request) const override {
    ++generate_calls_;
    return inner_.generate(request);
  }

  int generate_calls() const noexcept { return generate_calls_.load(); }
  void reset() noexcept { generate_calls_ = 0; }

 private:
  const LanguageModel& inner_;
  mutable std::atomic<int> generate_calls_{0};
};

// ---- FM oracle ----

/// SEP ‖ body_1 ‖ SEP ‖ ... ‖ body_n ‖ SEP.
TokenSeq joined_text(const std::vector<TokenSeq>& bodies);
std::size_t naive_count(const TokenSeq& text, std::span<const TokenId> pattern);
/// Distinct tokens right after any occurrence, SEP excluded, ascending.
std::vector<TokenId> naive_followers(const TokenSeq& text, std::span<const TokenId> pattern);
bool naive_followed_by_sep(const TokenSeq& text, std::span<const TokenId> pattern);

// ---- language oracle ----

/// Every accepted sequence (END appended) of a strategy, computed from the
/// record bodies: bodies for trie, non-empty suffixes for fm_index, distinct
/// permutations for term_set. Sorted and distinct.
std::vector<TokenSeq> language_of(Strategy strategy, const DocIdIndex& index);

struct ScoredSeq {
  TokenSeq tokens;
  double score;
};

/// The language ranked by sequence_logprob (desc), ties by tokens (asc).
std::vector<ScoredSeq> exhaustive_ranking(const LanguageModel& model, const Prompt& prompt,
                                          Strategy strategy, const DocIdIndex& index);

// ---- RQ oracle ----

/// Index of the nearest centroid by squared distance, ties to the lowest.
std::size_t brute_nearest(const std::vector<double>& point,
                          const std::vector<std::vector<double>>& centroids);

// ---- random inputs ----

/// Records with random bodies over `vocab_words` words (ids are contiguous
/// after the reserved ones), lengths in [1, max_len].
std::shared_ptr<const DocIdIndex> random_index(std::mt19937_64& rng, std::size_t n_records,
                                               std::size_t vocab_words, std::size_t max_len);

/// Documents made of random words from a pool of `pool` invented words.
Corpus random_corpus(std::mt19937_64& rng, std::size_t n_docs, std::size_t pool,
                     std::size_t min_words, std::size_t max_words);

/// A fresh empty directory under the system temp dir.
std::filesystem::path fresh_temp_dir(const std::string& name);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Path of a file under tests/data.
std::filesystem::path data_path(const std::string& name);

}  // namespace gentrieval::testing
