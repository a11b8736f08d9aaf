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

#include <json.hpp>

#include "gentrieval/error.hpp"
#include "gentrieval/eval.hpp"

namespace gentrieval {

namespace {

void check(std::span<const Run> runs, int k) {
  if (runs.empty()) throw Error(Errc::kEmptyRuns, "no runs to evaluate");
  if (k < 1) throw Error(Errc::kConfig, "k must be at least 1");
}

// 1-based rank of the first relevant candidate within the top k, 0 if none.
std::size_t first_relevant(const Run& run, int k) {
  const auto limit = std::min(run.ranked.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < limit; ++i) {
    if (run.relevant.contains(run.ranked[i].doc_key)) return i + 1;
  }
  return 0;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

}  // namespace

double hits_at_k(std::span<const Run> runs, int k) {
  check(runs, k);
  double hits = 0.0;
  for (const Run& run : runs) hits += first_relevant(run, k) > 0 ? 1.0 : 0.0;
  return hits / static_cast<double>(runs.size());
}

double mrr_at_k(std::span<const Run> runs, int k) {
  check(runs, k);
  double sum = 0.0;
  for (const Run& run : runs) {
    const auto rank = first_relevant(run, k);
    if (rank > 0) sum += 1.0 / static_cast<double>(rank);
  }
  return sum / static_cast<double>(runs.size());
}

MetricReport evaluate_runs(std::span<const Run> runs, std::span<const int> hits_ks,
                           std::span<const int> mrr_ks, std::span<const double> latencies_ms) {
  MetricReport report;
  report.n_queries = runs.size();
  for (int k : hits_ks) report.hits[k] = hits_at_k(runs, k);
  for (int k : mrr_ks) report.mrr[k] = mrr_at_k(runs, k);
  if (!latencies_ms.empty()) {
    double sum = 0.0;
    for (double ms : latencies_ms) sum += ms;
    report.mean_latency_ms = sum / static_cast<double>(latencies_ms.size());
    std::vector<double> values(latencies_ms.begin(), latencies_ms.end());
    report.p50_latency_ms = percentile(values, 0.50);
    report.p95_latency_ms = percentile(values, 0.95);
  }
  return report;
}

TerminationStats termination_stats(std::span<const TerminationReason> reasons) {
  if (reasons.empty()) throw Error(Errc::kEmptyRuns, "no traces");
  TerminationStats stats;
  stats.n = reasons.size();
  std::size_t all = 0, budget = 0, parse = 0;
  for (auto r : reasons) {
    switch (r) {
      case TerminationReason::kAllRelevant: ++all; break;
      case TerminationReason::kBudgetExhausted: ++budget; break;
      case TerminationReason::kParseFailure: ++parse; break;
    }
  }
  const auto n = static_cast<double>(stats.n);
  stats.all_relevant = static_cast<double>(all) / n;
  stats.budget_exhausted = static_cast<double>(budget) / n;
  stats.parse_failure = static_cast<double>(parse) / n;
  return stats;
}

TerminationStats termination_stats_from_trace(std::string_view jsonl) {
  std::vector<TerminationReason> reasons;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::string reason;
    try {
      const auto doc = nlohmann::json::parse(line);
      reason = doc.at("reason").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kMalformedRecord,
                  "trace line " + std::to_string(line_no) + ": " + e.what());
    }
    if (reason == "all_relevant") {
      reasons.push_back(TerminationReason::kAllRelevant);
    } else if (reason == "budget_exhausted") {
      reasons.push_back(TerminationReason::kBudgetExhausted);
    } else if (reason == "parse_failure") {
      reasons.push_back(TerminationReason::kParseFailure);
    } else {
      throw Error(Errc::kMalformedRecord,
                  "trace line " + std::to_string(line_no) + ": unknown reason '" + reason + "'");
    }
  }
  return termination_stats(reasons);
}

}  // namespace gentrieval
