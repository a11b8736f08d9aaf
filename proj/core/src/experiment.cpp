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

#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include <json.hpp>

#include "gentrieval/error.hpp"
#include "gentrieval/eval.hpp"

namespace gentrieval {

namespace {

using nlohmann::ordered_json;

struct Outcome {
  RankedList ranked;
  double ms = 0.0;
  std::optional<TerminationReason> reason;
  std::string trace;
};

std::string dump(const ordered_json& j, int indent = -1) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

ordered_json topk_json(const RankedList& ranked) {
  ordered_json out = ordered_json::array();
  for (const auto& c : ranked) {
    out.push_back({{"surface", c.surface}, {"score", c.score}, {"doc", c.doc_key}});
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The exception of the
// lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string_view to_string(Pipeline pipeline) noexcept {
  switch (pipeline) {
    case Pipeline::kStandard: return "standard";
    case Pipeline::kDirectCot: return "direct_cot";
    case Pipeline::kR4R: return "r4r";
  }
  return "unknown";
}

Pipeline parse_pipeline(std::string_view name) {
  if (name == "standard") return Pipeline::kStandard;
  if (name == "direct_cot" || name == "direct-cot") return Pipeline::kDirectCot;
  if (name == "r4r") return Pipeline::kR4R;
  throw Error(Errc::kConfig, "unknown pipeline '" + std::string(name) + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const ConstraintAutomaton& automaton,
                                std::span<const Query> queries, const LanguageModel& retriever,
                                const LanguageModel& reasoner, const PromptRegistry& prompts) {
  if (queries.empty()) throw Error(Errc::kEmptyRuns, "no queries to run");
  if (config.beam.beam_width < 1) throw Error(Errc::kConfig, "k must be at least 1");
  if (config.jobs < 1) throw Error(Errc::kConfig, "jobs must be at least 1");

  std::vector<std::pair<int, int>> grid;
  if (config.pipeline == Pipeline::kR4R) {
    if (config.verify_depths.empty() || config.round_budgets.empty()) {
      throw Error(Errc::kConfig, "empty t or T sweep");
    }
    for (int t : config.verify_depths) {
      for (int T : config.round_budgets) grid.emplace_back(t, T);
    }
  } else {
    grid.emplace_back(0, 0);
  }

  const Retriever retrieval{retriever, automaton, prompts, config.beam};
  ExperimentResult result;
  ordered_json rows = ordered_json::array();

  for (const auto& [t, T] : grid) {
    RefineConfig refine;
    refine.verify_depth = t;
    refine.round_budget = T;
    refine.ablation = config.ablation;
    refine.max_tokens = config.max_tokens;

    std::vector<Outcome> outcomes(queries.size());
    parallel_for(queries.size(), config.jobs, [&](std::size_t i) {
      const Query& q = queries[i];
      Outcome& out = outcomes[i];
      const auto started = std::chrono::steady_clock::now();
      ordered_json line;
      switch (config.pipeline) {
        case Pipeline::kStandard: {
          out.ranked = run_standard(q, retrieval);
          break;
        }
        case Pipeline::kDirectCot: {
          auto dc = run_direct_cot(q, reasoner, retrieval, config.max_tokens);
          out.ranked = std::move(dc.ranked);
          line["reasoning"] = dc.reasoning;
          break;
        }
        case Pipeline::kR4R: {
          R4RResult r = run_r4r(q, reasoner, retrieval, refine);
          out.ranked = r.ranked;
          out.reason = r.reason;
          out.trace = trace_json(r, config.timing);
          break;
        }
      }
      out.ms = config.timing
                   ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               started)
                         .count()
                   : 0.0;
      if (out.trace.empty()) {
        ordered_json head;
        head["qid"] = q.query_id;
        head["pipeline"] = std::string(to_string(config.pipeline));
        head["topk"] = topk_json(out.ranked);
        for (auto& [key, value] : line.items()) head[key] = value;
        if (config.timing) head["ms"] = out.ms;
        out.trace = dump(head);
      } else if (config.pipeline == Pipeline::kR4R) {
        // Prefix the sweep coordinates so rows of one trace file stay apart.
        out.trace = "{\"t\":" + std::to_string(t) + ",\"T\":" + std::to_string(T) + "," +
                    out.trace.substr(1);
      }
    });

    std::vector<Run> runs;
    std::vector<double> latencies;
    std::vector<TerminationReason> reasons;
    runs.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      runs.push_back({std::move(outcomes[i].ranked), queries[i].relevant_keys});
      latencies.push_back(outcomes[i].ms);
      if (outcomes[i].reason) reasons.push_back(*outcomes[i].reason);
      result.trace_jsonl += outcomes[i].trace;
      result.trace_jsonl += '\n';
    }

    ExperimentRow row;
    row.verify_depth = t;
    row.round_budget = T;
    row.metrics = evaluate_runs(runs, config.hits_ks, config.mrr_ks, latencies);
    if (!reasons.empty()) row.termination = termination_stats(reasons);

    ordered_json r;
    if (config.pipeline == Pipeline::kR4R) {
      r["t"] = t;
      r["T"] = T;
    }
    r["n_queries"] = row.metrics.n_queries;
    ordered_json hits, mrr;
    for (const auto& [k, v] : row.metrics.hits) hits[std::to_string(k)] = v;
    for (const auto& [k, v] : row.metrics.mrr) mrr[std::to_string(k)] = v;
    r["hits"] = std::move(hits);
    r["mrr"] = std::move(mrr);
    if (row.termination) {
      r["termination"] = {{"all_relevant", row.termination->all_relevant},
                          {"budget_exhausted", row.termination->budget_exhausted},
                          {"parse_failure", row.termination->parse_failure}};
    }
    if (config.timing) {
      r["latency_ms"] = {{"mean", row.metrics.mean_latency_ms},
                         {"p50", row.metrics.p50_latency_ms},
                         {"p95", row.metrics.p95_latency_ms}};
    }
    rows.push_back(std::move(r));
    result.rows.push_back(std::move(row));
  }

  ordered_json report;
  report["format"] = "gentrieval.report/1";
  ordered_json echo;
  echo["pipeline"] = std::string(to_string(config.pipeline));
  echo["strategy"] = std::string(to_string(automaton.strategy()));
  echo["k"] = config.beam.beam_width;
  echo["length_normalize"] = config.beam.length_normalize;
  echo["retriever"] = std::string(retriever.kind());
  echo["reasoner"] = std::string(reasoner.kind());
  echo["ablation"] = {{"no_context", config.ablation.no_context},
                      {"no_explanation", config.ablation.no_explanation},
                      {"no_verification", config.ablation.no_verification}};
  echo["max_tokens"] = config.max_tokens;
  echo["seed"] = config.seed;
  echo["timing"] = config.timing;
  report["config"] = std::move(echo);
  report["rows"] = std::move(rows);
  result.report_json = dump(report, 2) + "\n";
  return result;
}

}  // namespace gentrieval
