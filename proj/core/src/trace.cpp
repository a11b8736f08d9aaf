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

#include <json.hpp>

#include "gentrieval/orchestrator.hpp"

namespace gentrieval {

std::string trace_json(const R4RResult& result, bool timing) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["qid"] = result.qid;
  doc["reason"] = std::string(to_string(result.reason));
  doc["rounds"] = result.rounds_used;
  doc["retriever"] = result.retriever_kind;
  doc["reasoner"] = result.reasoner_kind;
  doc["shared_model"] = result.shared_model;
  ordered_json think;
  think["fallback"] = result.think_fallback;
  think["calls"] = result.think_calls;
  if (timing) think["ms"] = result.think_ms;
  doc["think"] = std::move(think);

  ordered_json rounds = ordered_json::array();
  for (const auto& round : result.rounds) {
    ordered_json r;
    r["round"] = round.round;
    r["c"] = round.context;
    r["e"] = round.explanation;
    ordered_json topk = ordered_json::array();
    for (const auto& c : round.topk) {
      topk.push_back({{"surface", c.surface}, {"score", c.score}, {"doc", c.doc_key}});
    }
    r["topk"] = std::move(topk);
    ordered_json judgments = ordered_json::array();
    for (Verdict v : round.judgments) judgments.push_back(std::string(to_string(v)));
    r["judgments"] = std::move(judgments);
    r["j_hat"] = round.j_hat;
    r["calls"] = round.generate_calls;
    if (timing) r["ms"] = round.ms;
    rounds.push_back(std::move(r));
  }
  doc["rounds_detail"] = std::move(rounds);
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace gentrieval
