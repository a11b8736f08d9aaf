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

/// \file lm.hpp
/// Language-model abstraction shared by constrained decoding (which needs
/// full next-token distributions) and the free-form reasoning steps (which
/// only need generate()).

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gentrieval/corpus.hpp"

namespace gentrieval {

/// Log-probability given to masked / impossible tokens. Finite so sums stay
/// well-defined; any masked beam is strictly dominated.
inline constexpr double kMaskedLogProb = -1e9;

/// Prompt text together with its lenient tokenization and its normalized
/// form (used for scripted matching).
struct Prompt {
  std::string text;
  TokenSeq tokens;
  std::string normalized;
};

Prompt encode_prompt(const Vocabulary& vocab, std::string text);

struct LmContext {
  const Prompt& prompt;
  std::span<const TokenId> generated;
};

/// Dense log-probabilities over the whole vocabulary, END included.
struct TokenDistribution {
  std::vector<double> logprobs;

  double logprob(TokenId id) const {
    return id < logprobs.size() ? logprobs[id] : kMaskedLogProb;
  }
  std::size_t size() const noexcept { return logprobs.size(); }
};

/// Renormalizes raw log-weights with log-sum-exp; entries at or below
/// kMaskedLogProb stay masked.
TokenDistribution normalize_logweights(std::vector<double> logweights);

struct GenerationRequest {
  std::string prompt;
  int max_tokens = 256;
  std::vector<std::string> stop;
  double temperature = 0.0;  // 0 = greedy
  std::uint64_t seed = 0;
};

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  /// "scripted", "ngram", "remote", ...
  virtual std::string_view kind() const noexcept = 0;
  virtual bool is_local() const noexcept { return true; }

  /// Errors: kNotSupported when the model cannot expose distributions,
  /// kUnknownToken for ids outside the vocabulary.
  virtual TokenDistribution next_token_distribution(const LmContext& ctx) const = 0;

  /// Free-form continuation. Errors: kRemoteUnavailable, kTimeout.
  virtual std::string generate(const GenerationRequest& request) const = 0;

  /// Sum over target positions of log p(target_i | prompt, target_<i).
  /// The target must end with END (kMissingEnd otherwise).
  double sequence_logprob(const Prompt& prompt, std::span<const TokenId> target) const;
};

/// Applies stop strings and a piece budget to already generated text. The
/// result is a prefix of `text`.
std::string truncate_generation(std::string_view text, int max_tokens,
                                std::span<const std::string> stop);

// ---------------------------------------------------------------------------
// Scripted model (test double and deterministic scenarios)

/// A rule matches when every present prompt filter matches the normalized
/// prompt. Distribution rules additionally match on the generated-so-far
/// words when `generated` is set. Rules are tried in order; first match wins.
struct ScriptedRule {
  std::optional<std::string> prompt;           // exact normalized prompt
  std::optional<std::string> prompt_contains;  // normalized substring
  std::optional<std::string> generated;        // space-joined generated words
  std::optional<std::string> response;         // for generate()
  std::optional<std::map<std::string, double>> distribution;  // word -> probability
};

/// Unmatched generate() returns "". Unmatched distribution requests return
/// the uniform distribution. Probability mass missing from a rule is spread
/// uniformly over the tokens it does not list.
class ScriptedModel final : public LanguageModel {
 public:
  ScriptedModel(std::vector<ScriptedRule> rules, std::shared_ptr<const Vocabulary> vocab);

  /// JSON list of rule objects with the ScriptedRule field names.
  static ScriptedModel from_json(std::string_view json_text,
                                 std::shared_ptr<const Vocabulary> vocab);
  static ScriptedModel load(const std::filesystem::path& path,
                            std::shared_ptr<const Vocabulary> vocab);

  std::string_view kind() const noexcept override { return "scripted"; }
  TokenDistribution next_token_distribution(const LmContext& ctx) const override;
  std::string generate(const GenerationRequest& request) const override;

  std::size_t rule_count() const noexcept { return rules_.size(); }

 private:
  struct CompiledRule {
    ScriptedRule rule;
    std::vector<std::pair<TokenId, double>> logprobs;
    double rest_logprob = kMaskedLogProb;
  };

  bool prompt_matches(const ScriptedRule& rule, std::string_view normalized) const;

  std::vector<CompiledRule> rules_;
  std::shared_ptr<const Vocabulary> vocab_;
};

// ---------------------------------------------------------------------------
// N-gram model

/// Word n-gram model (order 1..3) with add-one smoothing. Histories never seen
/// in training back off to the longest seen suffix; a model with no data is
/// uniform. Training is single-writer; afterwards the model is read-only.
class NgramModel final : public LanguageModel {
 public:
  explicit NgramModel(std::shared_ptr<const Vocabulary> vocab, int order = 3);

  /// Counts every n-gram of BOS^(order-1) ‖ prompt ‖ target.
  void train(std::span<const TokenId> prompt, std::span<const TokenId> target);

  std::string_view kind() const noexcept override { return "ngram"; }
  TokenDistribution next_token_distribution(const LmContext& ctx) const override;
  std::string generate(const GenerationRequest& request) const override;

  int order() const noexcept { return order_; }
  std::size_t training_sequences() const noexcept { return sequences_; }

 private:
  struct HistoryCounts {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint32_t> next;
  };

  TokenDistribution distribution_for(std::span<const TokenId> history) const;

  std::shared_ptr<const Vocabulary> vocab_;
  int order_;
  std::size_t sequences_ = 0;
  // tables_[o] holds histories of length o (0 <= o < order_).
  std::vector<std::unordered_map<std::uint64_t, HistoryCounts>> tables_;
};

// ---------------------------------------------------------------------------
// Remote model over HTTP

struct RemoteOptions {
  std::string url;  // http://host:port
  int retries = 2;
  int timeout_ms = 30000;
  int max_in_flight = 4;
};

/// POST /generate {"prompt","max_tokens","stop","temperature"} -> {"text"}.
/// POST /logprobs {"context_ids"} -> {"logprobs": {"<id>": float}}; a 404 or
/// 501 answer means the capability is absent (kNotSupported).
class RemoteModel final : public LanguageModel {
 public:
  RemoteModel(RemoteOptions options, std::shared_ptr<const Vocabulary> vocab = nullptr);
  ~RemoteModel() override;
  RemoteModel(const RemoteModel&) = delete;
  RemoteModel& operator=(const RemoteModel&) = delete;

  std::string_view kind() const noexcept override { return "remote"; }
  bool is_local() const noexcept override { return false; }
  TokenDistribution next_token_distribution(const LmContext& ctx) const override;
  std::string generate(const GenerationRequest& request) const override;

  const RemoteOptions& options() const noexcept { return options_; }

 private:
  struct Impl;
  RemoteOptions options_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gentrieval
