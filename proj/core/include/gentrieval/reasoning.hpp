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

/// \file reasoning.hpp
/// Prompt templates and the free-form reasoning steps: think, verify,
/// reflect and direct chain-of-thought.
///
/// Structured model output uses two tag-delimited blocks:
///
///   <context>short identifier-like phrase</context>
///   <explanation>supporting rationale</explanation>
///
/// Text outside the blocks is ignored.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gentrieval/corpus.hpp"
#include "gentrieval/lm.hpp"

namespace gentrieval {

enum class PromptKind { kIndexing, kRetrieval, kDirectCot, kThink, kVerify, kReflect };

/// File key of a prompt: "P_i", "P_r", "P_d", "P_t", "P_v", "P_f".
std::string_view prompt_key(PromptKind kind) noexcept;

struct Slot {
  std::string_view name;  // query, docid, context, explanation, document
  std::string_view value;
};

/// Replaces every "{name}" of a bound slot. A bound slot the template does not
/// mention is appended on its own line, in argument order; empty values are
/// then skipped. Throws kConfig when the template references a known slot
/// that is not bound.
std::string render_template(std::string_view tmpl, std::span<const Slot> slots);

class PromptRegistry {
 public:
  /// Built-in templates.
  PromptRegistry();

  /// JSON object keyed by prompt_key(); missing keys keep the defaults.
  static PromptRegistry from_json(std::string_view json_text);
  static PromptRegistry load(const std::filesystem::path& path);

  const std::string& get(PromptKind kind) const;
  void set(PromptKind kind, std::string text);

  /// Every template, for vocabulary seeding.
  std::vector<std::string> all() const;

 private:
  std::string templates_[6];
};

/// P_r ‖ query ‖ auxiliary. An empty auxiliary is omitted.
std::string retrieval_prompt(const PromptRegistry& prompts, std::string_view query,
                             std::string_view auxiliary = {});
/// P_i ‖ document text.
std::string indexing_prompt(const PromptRegistry& prompts, std::string_view document);

enum class ParseMode {
  kBoth,             // context required, explanation block required
  kContextOnly,      // explanation ignored
  kExplanationOnly,  // context ignored, explanation required and nonempty
};

struct StructuredOutput {
  std::string context;
  std::string explanation;
};

/// First well-formed block of each tag (case-insensitive), trimmed.
std::optional<StructuredOutput> parse_structured(std::string_view text,
                                                 ParseMode mode = ParseMode::kBoth);

struct ReasoningState {
  int round = 0;
  std::string context;
  std::string explanation;
};

struct ReasoningOptions {
  ParseMode mode = ParseMode::kBoth;
  int max_tokens = 256;
};

struct ThinkResult {
  ReasoningState state;
  bool fell_back = false;
  int calls = 0;
};

/// Never fails to parse: after one retry the raw query becomes the context
/// (and, in explanation-only mode, the explanation). Transport errors become
/// kModelFailure.
ThinkResult think(const LanguageModel& model, const Query& query, const PromptRegistry& prompts,
                  const ReasoningOptions& options = {});

enum class Verdict { kRelevant, kIrrelevant };

std::string_view to_string(Verdict verdict) noexcept;

struct RelevanceJudgment {
  Verdict verdict = Verdict::kRelevant;
  std::string raw;
  bool defaulted = false;
  int calls = 0;
};

/// "irrelevant" anywhere in the answer wins, then "relevant"; neither after
/// one retry counts as relevant.
std::optional<Verdict> parse_verdict(std::string_view text);

RelevanceJudgment verify(const LanguageModel& model, const Query& query,
                         std::string_view docid_surface, const PromptRegistry& prompts,
                         const ReasoningOptions& options = {});

struct ReflectResult {
  std::optional<ReasoningState> state;  // empty: parse failed twice
  int calls = 0;
};

/// In context-only mode the explanation is carried over unchanged; in
/// explanation-only mode the context is.
ReflectResult reflect(const LanguageModel& model, const Query& query,
                      std::string_view failed_surface, const ReasoningState& state,
                      const PromptRegistry& prompts, const ReasoningOptions& options = {});

/// Unconstrained P_d ‖ query generation capped at options.max_tokens pieces.
std::string direct_cot(const LanguageModel& model, const Query& query,
                       const PromptRegistry& prompts, const ReasoningOptions& options = {});

}  // namespace gentrieval
