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

/// \file orchestrator.hpp
/// Retrieval pipelines: standard constrained retrieval, direct
/// chain-of-thought followed by retrieval, and the think / retrieve / refine
/// loop.

#include <string>
#include <string_view>
#include <vector>

#include "gentrieval/constraint.hpp"
#include "gentrieval/decode.hpp"
#include "gentrieval/lm.hpp"
#include "gentrieval/reasoning.hpp"

namespace gentrieval {

/// Everything a single constrained retrieval call needs.
struct Retriever {
  const LanguageModel& model;
  const ConstraintAutomaton& automaton;
  const PromptRegistry& prompts;
  BeamConfig beam;
};

/// Constrained search on P_r ‖ query ‖ auxiliary. Single-view indexes keep
/// the best hypothesis per document; multi-view indexes merge views with
/// log-sum-exp. Truncated to the beam width.
RankedList retrieve(const Retriever& retriever, std::string_view query,
                    std::string_view auxiliary = {});

/// Errors: kEmptyQuery, kNoValidPath.
RankedList run_standard(const Query& query, const Retriever& retriever);

struct DirectCotResult {
  RankedList ranked;
  std::string reasoning;
};

/// Errors: kEmptyQuery, kNoValidPath, kModelFailure.
DirectCotResult run_direct_cot(const Query& query, const LanguageModel& reasoner,
                               const Retriever& retriever, int max_tokens = 256);

struct Ablation {
  bool no_context = false;
  bool no_explanation = false;
  bool no_verification = false;
};

struct RefineConfig {
  int verify_depth = 3;  // t
  int round_budget = 3;  // T
  Ablation ablation;
  int max_tokens = 256;
};

enum class TerminationReason { kAllRelevant, kParseFailure, kBudgetExhausted };

std::string_view to_string(TerminationReason reason) noexcept;

struct RoundTrace {
  int round = 0;
  std::string context;
  std::string explanation;
  RankedList topk;
  std::vector<Verdict> judgments;
  int j_hat = 0;  // 1-based rank of the first irrelevant candidate, 0 if none
  int generate_calls = 0;
  double ms = 0.0;
};

struct R4RResult {
  std::string qid;
  RankedList ranked;
  TerminationReason reason = TerminationReason::kBudgetExhausted;
  int rounds_used = 0;
  bool think_fallback = false;
  int think_calls = 0;
  double think_ms = 0.0;
  std::string retriever_kind;
  std::string reasoner_kind;
  bool shared_model = false;
  std::vector<RoundTrace> rounds;
};

/// The reasoner may be the same object as the retrieval model.
/// Errors: kEmptyQuery, kConfig, kNoValidPath, kModelFailure.
R4RResult run_r4r(const Query& query, const LanguageModel& reasoner, const Retriever& retriever,
                  const RefineConfig& config);

/// One JSON line (no trailing newline) with fields qid, reason, rounds,
/// rounds_detail and model information. Latencies are omitted when
/// `timing` is false.
std::string trace_json(const R4RResult& result, bool timing = true);

}  // namespace gentrieval
