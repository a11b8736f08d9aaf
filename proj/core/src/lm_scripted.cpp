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

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gentrieval/error.hpp"
#include "gentrieval/lm.hpp"

namespace gentrieval {

namespace {

using json = nlohmann::json;

std::optional<std::string> optional_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(Errc::kConfig, std::string("scripted rule field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

ScriptedModel::ScriptedModel(std::vector<ScriptedRule> rules,
                             std::shared_ptr<const Vocabulary> vocab)
    : vocab_(std::move(vocab)) {
  for (auto& rule : rules) {
    if (rule.prompt) rule.prompt = normalize_text(*rule.prompt);
    if (rule.prompt_contains) rule.prompt_contains = normalize_text(*rule.prompt_contains);
    if (rule.generated) rule.generated = normalize_text(*rule.generated);

    CompiledRule compiled;
    if (rule.distribution) {
      if (!vocab_) {
        throw Error(Errc::kConfig, "scripted distributions require a vocabulary");
      }
      double mass = 0.0;
      for (const auto& [word, p] : *rule.distribution) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw Error(Errc::kConfig, "scripted probability for '" + word + "' is invalid");
        }
        auto id = vocab_->find(word);
        if (!id) throw Error(Errc::kUnknownToken, "scripted word '" + word + "' not in vocabulary");
        mass += p;
      }
      const std::size_t listed = rule.distribution->size();
      const std::size_t rest = vocab_->size() - listed;
      const double scale = (mass > 1.0 || rest == 0) && mass > 0.0 ? 1.0 / mass : 1.0;
      for (const auto& [word, p] : *rule.distribution) {
        const double q = p * scale;
        compiled.logprobs.emplace_back(*vocab_->find(word),
                                       q > 0.0 ? std::log(q) : kMaskedLogProb);
      }
      const double leftover = 1.0 - mass * scale;
      if (rest > 0 && leftover > 1e-12) {
        compiled.rest_logprob = std::log(leftover / static_cast<double>(rest));
      } else if (mass <= 0.0) {
        throw Error(Errc::kConfig, "scripted distribution has no mass");
      }
    }
    compiled.rule = std::move(rule);
    rules_.push_back(std::move(compiled));
  }
}

ScriptedModel ScriptedModel::from_json(std::string_view json_text,
                                       std::shared_ptr<const Vocabulary> vocab) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kConfig, std::string("scripted model: ") + e.what());
  }
  if (!j.is_array()) throw Error(Errc::kConfig, "scripted model must be a JSON list of rules");
  std::vector<ScriptedRule> rules;
  for (const auto& jr : j) {
    if (!jr.is_object()) throw Error(Errc::kConfig, "scripted rule must be an object");
    ScriptedRule r;
    r.prompt = optional_string(jr, "prompt");
    r.prompt_contains = optional_string(jr, "prompt_contains");
    r.generated = optional_string(jr, "generated");
    r.response = optional_string(jr, "response");
    if (auto it = jr.find("distribution"); it != jr.end() && !it->is_null()) {
      try {
        r.distribution = it->get<std::map<std::string, double>>();
      } catch (const json::exception&) {
        throw Error(Errc::kConfig, "scripted distribution must map words to numbers");
      }
    }
    if (!r.response && !r.distribution) {
      throw Error(Errc::kConfig, "scripted rule needs a response or a distribution");
    }
    rules.push_back(std::move(r));
  }
  return ScriptedModel(std::move(rules), std::move(vocab));
}

ScriptedModel ScriptedModel::load(const std::filesystem::path& path,
                                  std::shared_ptr<const Vocabulary> vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str(), std::move(vocab));
}

bool ScriptedModel::prompt_matches(const ScriptedRule& rule, std::string_view normalized) const {
  if (rule.prompt && *rule.prompt != normalized) return false;
  if (rule.prompt_contains && normalized.find(*rule.prompt_contains) == std::string_view::npos) {
    return false;
  }
  return true;
}

TokenDistribution ScriptedModel::next_token_distribution(const LmContext& ctx) const {
  if (!vocab_) throw Error(Errc::kNotSupported, "scripted model has no vocabulary");
  for (TokenId t : ctx.prompt.tokens) {
    if (!vocab_->contains(t)) throw Error(Errc::kUnknownToken, "context id out of vocabulary");
  }
  for (TokenId t : ctx.generated) {
    if (!vocab_->contains(t)) throw Error(Errc::kUnknownToken, "context id out of vocabulary");
  }
  const std::size_t v = vocab_->size();
  std::optional<std::string> generated_words;
  for (const auto& compiled : rules_) {
    const ScriptedRule& rule = compiled.rule;
    if (!rule.distribution || !prompt_matches(rule, ctx.prompt.normalized)) continue;
    if (rule.generated) {
      if (!generated_words) generated_words = detokenize(*vocab_, ctx.generated);
      if (*rule.generated != *generated_words) continue;
    }
    TokenDistribution d{std::vector<double>(v, compiled.rest_logprob)};
    for (const auto& [id, lp] : compiled.logprobs) d.logprobs[id] = lp;
    return d;
  }
  return TokenDistribution{std::vector<double>(v, -std::log(static_cast<double>(v)))};
}

std::string ScriptedModel::generate(const GenerationRequest& request) const {
  const std::string normalized = normalize_text(request.prompt);
  for (const auto& compiled : rules_) {
    const ScriptedRule& rule = compiled.rule;
    if (!rule.response || !prompt_matches(rule, normalized)) continue;
    return truncate_generation(*rule.response, request.max_tokens, request.stop);
  }
  if (request.max_tokens < 1) throw Error(Errc::kConfig, "max_tokens must be >= 1");
  return {};
}

}  // namespace gentrieval
