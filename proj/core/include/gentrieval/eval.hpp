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

/// \file eval.hpp
/// Ranking metrics, likelihood diagnostics, termination statistics and the
/// batch experiment runner.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gentrieval/constraint.hpp"
#include "gentrieval/corpus.hpp"
#include "gentrieval/decode.hpp"
#include "gentrieval/docid.hpp"
#include "gentrieval/lm.hpp"
#include "gentrieval/orchestrator.hpp"
#include "gentrieval/reasoning.hpp"

namespace gentrieval {

/// One query's ranking together with its relevant doc keys.
struct Run {
  RankedList ranked;
  std::set<std::string> relevant;
};

/// Mean of 1{top-k contains a relevant doc}. Errors: kEmptyRuns, kConfig (k < 1).
double hits_at_k(std::span<const Run> runs, int k);
/// Mean reciprocal rank of the first relevant doc within the top k.
double mrr_at_k(std::span<const Run> runs, int k);

struct MetricReport {
  std::map<int, double> hits;
  std::map<int, double> mrr;
  std::size_t n_queries = 0;
  double mean_latency_ms = 0.0;
  double p50_latency_ms = 0.0;
  double p95_latency_ms = 0.0;
};

MetricReport evaluate_runs(std::span<const Run> runs, std::span<const int> hits_ks,
                           std::span<const int> mrr_ks, std::span<const double> latencies_ms = {});

struct TerminationStats {
  double all_relevant = 0.0;
  double budget_exhausted = 0.0;
  double parse_failure = 0.0;
  std::size_t n = 0;
};

/// Errors: kEmptyRuns.
TerminationStats termination_stats(std::span<const TerminationReason> reasons);
/// Reads the "reason" field of every non-blank trace line.
/// Errors: kEmptyRuns, kMalformedRecord.
TerminationStats termination_stats_from_trace(std::string_view jsonl);

enum class NllMode { kStandard, kInstruction };

std::string_view to_string(NllMode mode) noexcept;

struct NllTerm {
  std::string prompt;  // full conditioning text
  std::string doc_key;
  double logprob = 0.0;
};

struct NllReport {
  NllMode mode = NllMode::kStandard;
  double indexing_loss = 0.0;
  double retrieval_loss = 0.0;
  double total = 0.0;
  std::vector<NllTerm> indexing_terms;
  std::vector<NllTerm> retrieval_terms;
};

/// A (query text, doc key) training or evaluation pair.
using QueryDocPair = std::pair<std::string, std::string>;

/// Retrieval pairs from each query's relevant set, in query order.
std::vector<QueryDocPair> query_doc_pairs(std::span<const Query> queries);

/// Conditioning text for indexing (document text) or retrieval (query text);
/// instruction mode prepends P_i or P_r.
std::string nll_prompt(const PromptRegistry& prompts, NllMode mode, bool indexing,
                       std::string_view text);

/// Identifier targets are each document's path record (its first record if
/// the index has no path view). Errors: kNotSupported for non-local models,
/// kUnknownDoc.
NllReport nll_losses(const LanguageModel& model, const Corpus& corpus,
                     std::span<const QueryDocPair> pairs, const DocIdIndex& index,
                     NllMode mode, const PromptRegistry& prompts = {});

/// Trains on every (document text, identifier) pair, every pseudo-query and
/// every given (query, doc) pair, with prompts prepended in instruction mode.
void train_ngram(NgramModel& model, const Corpus& corpus, std::span<const QueryDocPair> pairs,
                 const DocIdIndex& index, NllMode mode, const PromptRegistry& prompts = {});

enum class Pipeline { kStandard, kDirectCot, kR4R };

std::string_view to_string(Pipeline pipeline) noexcept;
Pipeline parse_pipeline(std::string_view name);

struct ExperimentConfig {
  Pipeline pipeline = Pipeline::kStandard;
  BeamConfig beam;
  std::vector<int> verify_depths{3};
  std::vector<int> round_budgets{3};
  Ablation ablation;
  int max_tokens = 256;
  int jobs = 1;
  bool timing = false;  // latencies make output run-dependent
  std::uint64_t seed = 0;
  std::vector<int> hits_ks{1, 5, 20};
  std::vector<int> mrr_ks{10};
};

struct ExperimentRow {
  int verify_depth = 0;
  int round_budget = 0;
  MetricReport metrics;
  std::optional<TerminationStats> termination;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::string report_json;  // one JSON document, newline-terminated
  std::string trace_jsonl;  // one line per (row, query)
};

/// Runs every query for every (t, T) combination (a single row for the
/// non-iterative pipelines). Output is independent of `jobs`.
/// Errors: kConfig, kEmptyRuns, kModelFailure, kNoValidPath.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const ConstraintAutomaton& automaton,
                                std::span<const Query> queries, const LanguageModel& retriever,
                                const LanguageModel& reasoner, const PromptRegistry& prompts);

}  // namespace gentrieval
