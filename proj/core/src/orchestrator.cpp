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

#include <chrono>

#include "gentrieval/error.hpp"
#include "gentrieval/orchestrator.hpp"

namespace gentrieval {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool multi_view(const DocIdIndex& index) {
  const auto& records = index.records();
  for (const auto& r : records) {
    if (r.view != records.front().view) return true;
  }
  return false;
}

void require_query(const Query& query) {
  if (normalize_text(query.text).empty()) {
    throw Error(Errc::kEmptyQuery, "query '" + query.query_id + "' has no text");
  }
}

}  // namespace

std::string_view to_string(TerminationReason reason) noexcept {
  switch (reason) {
    case TerminationReason::kAllRelevant: return "all_relevant";
    case TerminationReason::kParseFailure: return "parse_failure";
    case TerminationReason::kBudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

RankedList retrieve(const Retriever& retriever, std::string_view query,
                    std::string_view auxiliary) {
  const DocIdIndex& index = retriever.automaton.index();
  const Prompt prompt =
      encode_prompt(index.vocab(), retrieval_prompt(retriever.prompts, query, auxiliary));
  const auto hyps =
      constrained_beam_search(retriever.model, prompt, retriever.automaton, retriever.beam);
  const auto k = static_cast<std::size_t>(retriever.beam.beam_width);
  if (multi_view(index)) {
    RankedList merged = merge_views(retriever.automaton, hyps);
    if (merged.size() > k) merged.resize(k);
    return merged;
  }
  std::vector<Candidate> candidates;
  for (const auto& h : hyps) {
    for (std::size_t r : h.records) {
      const auto& rec = index.record(r);
      candidates.push_back({r, rec.surface, rec.doc_key, h.score});
    }
  }
  return dedup_rank(std::move(candidates), k);
}

RankedList run_standard(const Query& query, const Retriever& retriever) {
  require_query(query);
  return retrieve(retriever, query.text);
}

DirectCotResult run_direct_cot(const Query& query, const LanguageModel& reasoner,
                               const Retriever& retriever, int max_tokens) {
  require_query(query);
  DirectCotResult out;
  ReasoningOptions options;
  options.max_tokens = max_tokens;
  out.reasoning = direct_cot(reasoner, query, retriever.prompts, options);
  out.ranked = retrieve(retriever, query.text, out.reasoning);
  return out;
}

R4RResult run_r4r(const Query& query, const LanguageModel& reasoner, const Retriever& retriever,
                  const RefineConfig& config) {
  require_query(query);
  if (config.round_budget < 1) throw Error(Errc::kConfig, "round budget must be at least 1");
  if (config.verify_depth < 1 || config.verify_depth > retriever.beam.beam_width) {
    throw Error(Errc::kConfig, "verify depth must lie in [1, beam width]");
  }
  const Ablation& ablation = config.ablation;
  if (ablation.no_context && ablation.no_explanation) {
    throw Error(Errc::kConfig, "no_context and no_explanation cannot be combined");
  }

  ReasoningOptions options;
  options.max_tokens = config.max_tokens;
  options.mode = ablation.no_context       ? ParseMode::kExplanationOnly
                 : ablation.no_explanation ? ParseMode::kContextOnly
                                           : ParseMode::kBoth;

  R4RResult result;
  result.qid = query.query_id;
  result.retriever_kind = std::string(retriever.model.kind());
  result.reasoner_kind = std::string(reasoner.kind());
  result.shared_model = &reasoner == &retriever.model;

  auto started = Clock::now();
  ThinkResult thought = think(reasoner, query, retriever.prompts, options);
  result.think_ms = elapsed_ms(started);
  result.think_fallback = thought.fell_back;
  result.think_calls = thought.calls;
  ReasoningState state = std::move(thought.state);

  for (int round = 1; round <= config.round_budget; ++round) {
    started = Clock::now();
    RoundTrace trace;
    trace.round = round;
    trace.context = state.context;
    trace.explanation = state.explanation;
    const std::string& auxiliary = ablation.no_context ? state.explanation : state.context;
    trace.topk = retrieve(retriever, query.text, auxiliary);
    result.ranked = trace.topk;
    result.rounds_used = round;

    if (ablation.no_verification) {
      trace.j_hat = trace.topk.empty() ? 0 : 1;
    } else {
      const auto depth = std::min<std::size_t>(static_cast<std::size_t>(config.verify_depth),
                                               trace.topk.size());
      for (std::size_t j = 0; j < depth; ++j) {
        RelevanceJudgment judgment =
            verify(reasoner, query, trace.topk[j].surface, retriever.prompts, options);
        trace.generate_calls += judgment.calls;
        trace.judgments.push_back(judgment.verdict);
        if (judgment.verdict == Verdict::kIrrelevant) {
          trace.j_hat = static_cast<int>(j) + 1;
          break;
        }
      }
    }

    if (trace.j_hat == 0) {
      trace.ms = elapsed_ms(started);
      result.rounds.push_back(std::move(trace));
      result.reason = TerminationReason::kAllRelevant;
      return result;
    }

    const Candidate& failed = trace.topk[static_cast<std::size_t>(trace.j_hat) - 1];
    ReflectResult reflected =
        reflect(reasoner, query, failed.surface, state, retriever.prompts, options);
    trace.generate_calls += reflected.calls;
    trace.ms = elapsed_ms(started);
    result.rounds.push_back(std::move(trace));
    if (!reflected.state) {
      result.reason = TerminationReason::kParseFailure;
      return result;
    }
    state = std::move(*reflected.state);
  }
  result.reason = TerminationReason::kBudgetExhausted;
  return result;
}

}  // namespace gentrieval
