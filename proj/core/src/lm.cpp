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
#include <limits>

#include "gentrieval/error.hpp"
#include "gentrieval/lm.hpp"

namespace gentrieval {

Prompt encode_prompt(const Vocabulary& vocab, std::string text) {
  Prompt p;
  p.tokens = tokenize_lenient(vocab, text);
  p.normalized = normalize_text(text);
  p.text = std::move(text);
  return p;
}

TokenDistribution normalize_logweights(std::vector<double> logweights) {
  double max = -std::numeric_limits<double>::infinity();
  for (double w : logweights) {
    if (w > kMaskedLogProb) max = std::max(max, w);
  }
  if (!std::isfinite(max)) {
    throw Error(Errc::kModelFailure, "distribution has no unmasked mass");
  }
  double sum = 0.0;
  for (double w : logweights) {
    if (w > kMaskedLogProb) sum += std::exp(w - max);
  }
  const double log_z = max + std::log(sum);
  for (double& w : logweights) w = w > kMaskedLogProb ? w - log_z : kMaskedLogProb;
  return TokenDistribution{std::move(logweights)};
}

double LanguageModel::sequence_logprob(const Prompt& prompt,
                                       std::span<const TokenId> target) const {
  if (target.empty() || target.back() != kEndToken) {
    throw Error(Errc::kMissingEnd, "target sequence must end with END");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const LmContext ctx{prompt, target.first(i)};
    total += next_token_distribution(ctx).logprob(target[i]);
  }
  return total;
}

std::string truncate_generation(std::string_view text, int max_tokens,
                                std::span<const std::string> stop) {
  if (max_tokens < 1) throw Error(Errc::kConfig, "max_tokens must be >= 1");
  std::size_t cut = text.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    if (auto pos = text.find(s); pos != std::string_view::npos) cut = std::min(cut, pos);
  }
  text = text.substr(0, cut);
  const auto pieces = split_words(text);
  if (pieces.size() > static_cast<std::size_t>(max_tokens)) {
    text = text.substr(0, pieces[max_tokens - 1].end);
  }
  return std::string(text);
}

}  // namespace gentrieval
