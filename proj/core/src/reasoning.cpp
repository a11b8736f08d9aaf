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
#include <cctype>

#include "gentrieval/error.hpp"
#include "gentrieval/reasoning.hpp"

namespace gentrieval {

namespace {

constexpr std::string_view kStructuredReminder =
    "\n\nFormat reminder: reply only with <context>...</context> and "
    "<explanation>...</explanation>.";
constexpr std::string_view kVerdictReminder =
    "\n\nFormat reminder: answer with exactly one word, relevant or irrelevant.";

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// The first closing tag together with the nearest opening tag before it.
std::optional<std::string> first_block(std::string_view text, std::string_view lower,
                                       std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  std::size_t from = 0;
  while (true) {
    const auto end = lower.find(close, from);
    if (end == std::string_view::npos) return std::nullopt;
    const auto begin = lower.rfind(open, end);
    if (begin != std::string_view::npos && begin + open.size() <= end) {
      return std::string(trim(text.substr(begin + open.size(), end - begin - open.size())));
    }
    from = end + close.size();
  }
}

std::string call(const LanguageModel& model, std::string prompt, int max_tokens) {
  GenerationRequest request;
  request.prompt = std::move(prompt);
  request.max_tokens = max_tokens;
  try {
    return model.generate(request);
  } catch (const Error& e) {
    if (e.code() == Errc::kRemoteUnavailable || e.code() == Errc::kTimeout) {
      throw Error(Errc::kModelFailure, std::string(to_string(e.code())) + ": " + e.what());
    }
    throw;
  }
}

}  // namespace

std::optional<StructuredOutput> parse_structured(std::string_view text, ParseMode mode) {
  const std::string lower = lowercase(text);
  StructuredOutput out;
  if (mode != ParseMode::kExplanationOnly) {
    auto context = first_block(text, lower, "context");
    if (!context || context->empty()) return std::nullopt;
    out.context = std::move(*context);
  }
  if (mode != ParseMode::kContextOnly) {
    auto explanation = first_block(text, lower, "explanation");
    if (!explanation) return std::nullopt;
    if (mode == ParseMode::kExplanationOnly && explanation->empty()) return std::nullopt;
    out.explanation = std::move(*explanation);
  }
  return out;
}

ThinkResult think(const LanguageModel& model, const Query& query, const PromptRegistry& prompts,
                  const ReasoningOptions& options) {
  const Slot slots[] = {{"query", query.text}};
  const std::string prompt = render_template(prompts.get(PromptKind::kThink), slots);
  ThinkResult result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string text = call(model, attempt == 0 ? prompt : prompt + std::string(kStructuredReminder),
                            options.max_tokens);
    ++result.calls;
    if (auto parsed = parse_structured(text, options.mode)) {
      result.state.context = std::move(parsed->context);
      result.state.explanation = std::move(parsed->explanation);
      if (options.mode == ParseMode::kExplanationOnly) result.state.context = query.text;
      return result;
    }
  }
  result.fell_back = true;
  result.state.context = query.text;
  if (options.mode == ParseMode::kExplanationOnly) result.state.explanation = query.text;
  return result;
}

std::string_view to_string(Verdict verdict) noexcept {
  return verdict == Verdict::kRelevant ? "relevant" : "irrelevant";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  const std::string lower = lowercase(text);
  if (lower.find("irrelevant") != std::string::npos) return Verdict::kIrrelevant;
  if (lower.find("relevant") != std::string::npos) return Verdict::kRelevant;
  return std::nullopt;
}

RelevanceJudgment verify(const LanguageModel& model, const Query& query,
                         std::string_view docid_surface, const PromptRegistry& prompts,
                         const ReasoningOptions& options) {
  const Slot slots[] = {{"query", query.text}, {"docid", docid_surface}};
  const std::string prompt = render_template(prompts.get(PromptKind::kVerify), slots);
  RelevanceJudgment judgment;
  for (int attempt = 0; attempt < 2; ++attempt) {
    judgment.raw = call(model, attempt == 0 ? prompt : prompt + std::string(kVerdictReminder),
                        options.max_tokens);
    ++judgment.calls;
    if (auto verdict = parse_verdict(judgment.raw)) {
      judgment.verdict = *verdict;
      return judgment;
    }
  }
  judgment.verdict = Verdict::kRelevant;
  judgment.defaulted = true;
  return judgment;
}

ReflectResult reflect(const LanguageModel& model, const Query& query,
                      std::string_view failed_surface, const ReasoningState& state,
                      const PromptRegistry& prompts, const ReasoningOptions& options) {
  const Slot slots[] = {{"query", query.text},
                        {"docid", failed_surface},
                        {"context", state.context},
                        {"explanation", state.explanation}};
  const std::string prompt = render_template(prompts.get(PromptKind::kReflect), slots);
  ReflectResult result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string text = call(model, attempt == 0 ? prompt : prompt + std::string(kStructuredReminder),
                            options.max_tokens);
    ++result.calls;
    if (auto parsed = parse_structured(text, options.mode)) {
      ReasoningState next;
      next.round = state.round + 1;
      next.context = options.mode == ParseMode::kExplanationOnly ? state.context
                                                                 : std::move(parsed->context);
      next.explanation = options.mode == ParseMode::kContextOnly ? state.explanation
                                                                 : std::move(parsed->explanation);
      result.state = std::move(next);
      return result;
    }
  }
  return result;
}

std::string direct_cot(const LanguageModel& model, const Query& query,
                       const PromptRegistry& prompts, const ReasoningOptions& options) {
  const Slot slots[] = {{"query", query.text}};
  const std::string prompt = render_template(prompts.get(PromptKind::kDirectCot), slots);
  const std::string text = call(model, prompt, options.max_tokens);
  return truncate_generation(text, options.max_tokens, {});
}

}  // namespace gentrieval
