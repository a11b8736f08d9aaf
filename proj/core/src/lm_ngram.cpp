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
#include <cmath>
#include <random>

#include "gentrieval/error.hpp"
#include "gentrieval/lm.hpp"

namespace gentrieval {

namespace {

constexpr TokenId kBos = 0xFFFFFFFFu;

std::uint64_t history_key(std::span<const TokenId> history) {
  // At most two ids; BOS fills missing positions.
  std::uint64_t key = 0;
  for (TokenId t : history) key = (key << 32) | t;
  return key;
}

}  // namespace

NgramModel::NgramModel(std::shared_ptr<const Vocabulary> vocab, int order)
    : vocab_(std::move(vocab)), order_(order) {
  if (!vocab_) throw Error(Errc::kConfig, "n-gram model requires a vocabulary");
  if (order_ < 1 || order_ > 3) throw Error(Errc::kConfig, "n-gram order must be 1, 2 or 3");
  tables_.resize(order_);
}

void NgramModel::train(std::span<const TokenId> prompt, std::span<const TokenId> target) {
  std::vector<TokenId> seq(order_ - 1, kBos);
  seq.insert(seq.end(), prompt.begin(), prompt.end());
  seq.insert(seq.end(), target.begin(), target.end());
  for (std::size_t i = order_ - 1; i < seq.size(); ++i) {
    if (!vocab_->contains(seq[i])) {
      throw Error(Errc::kUnknownToken, "training id out of vocabulary");
    }
    for (int o = 0; o < order_; ++o) {
      const std::span<const TokenId> history(seq.data() + i - o, static_cast<std::size_t>(o));
      auto& counts = tables_[o][history_key(history)];
      ++counts.total;
      ++counts.next[seq[i]];
    }
  }
  ++sequences_;
}

TokenDistribution NgramModel::distribution_for(std::span<const TokenId> history) const {
  const std::size_t v = vocab_->size();
  for (int o = order_ - 1; o >= 0; --o) {
    const auto h = history.last(static_cast<std::size_t>(o));
    auto it = tables_[o].find(history_key(h));
    if (it == tables_[o].end() || it->second.total == 0) continue;
    const double denom = static_cast<double>(it->second.total + v);
    TokenDistribution d{std::vector<double>(v, -std::log(denom))};
    for (const auto& [token, count] : it->second.next) {
      d.logprobs[token] = std::log((count + 1.0) / denom);
    }
    return d;
  }
  return TokenDistribution{std::vector<double>(v, -std::log(static_cast<double>(v)))};
}

TokenDistribution NgramModel::next_token_distribution(const LmContext& ctx) const {
  std::vector<TokenId> history(order_ - 1, kBos);
  auto push = [&](TokenId t) {
    if (!vocab_->contains(t)) throw Error(Errc::kUnknownToken, "context id out of vocabulary");
    if (history.empty()) return;
    std::rotate(history.begin(), history.begin() + 1, history.end());
    history.back() = t;
  };
  for (TokenId t : ctx.prompt.tokens) push(t);
  for (TokenId t : ctx.generated) push(t);
  return distribution_for(history);
}

std::string NgramModel::generate(const GenerationRequest& request) const {
  if (request.max_tokens < 1) throw Error(Errc::kConfig, "max_tokens must be >= 1");
  const Prompt prompt = encode_prompt(*vocab_, request.prompt);
  std::mt19937_64 rng(request.seed);
  TokenSeq generated;
  std::string text;
  for (int step = 0; step < request.max_tokens; ++step) {
    TokenDistribution d = next_token_distribution({prompt, generated});
    d.logprobs[kSepToken] = kMaskedLogProb;
    d.logprobs[kUnkToken] = kMaskedLogProb;
    TokenId next = kEndToken;
    if (request.temperature <= 0.0) {
      next = static_cast<TokenId>(std::max_element(d.logprobs.begin(), d.logprobs.end()) -
                                  d.logprobs.begin());
    } else {
      std::vector<double> weights(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        weights[i] = d.logprobs[i] <= kMaskedLogProb
                         ? 0.0
                         : std::exp(d.logprobs[i] / request.temperature);
      }
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      next = static_cast<TokenId>(pick(rng));
    }
    if (next == kEndToken) break;
    generated.push_back(next);
    if (!text.empty()) text.push_back(' ');
    text += vocab_->word(next);
    if (std::any_of(request.stop.begin(), request.stop.end(), [&](const std::string& s) {
          return !s.empty() && text.find(s) != std::string::npos;
        })) {
      break;
    }
  }
  return truncate_generation(text, request.max_tokens, request.stop);
}

}  // namespace gentrieval
