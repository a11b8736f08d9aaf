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

/// \file decode.hpp
/// Constrained beam search and ranking of the resulting identifiers.

#include <cstddef>
#include <string>
#include <vector>

#include "gentrieval/constraint.hpp"
#include "gentrieval/lm.hpp"

namespace gentrieval {

struct BeamConfig {
  int beam_width = 20;
  int max_len = 0;  // 0: longest identifier of the index plus END
  bool length_normalize = false;
};

/// A finished hypothesis. `tokens` ends with END; `records` are the index
/// positions the automaton accepts for it.
struct BeamHypothesis {
  TokenSeq tokens;
  double score = 0.0;
  std::vector<std::size_t> records;
};

/// Beam search in which only allowed() tokens are expanded. Finished
/// hypotheses go to a separate pool; returns up to beam_width of them by
/// score (log-prob, or log-prob per token with length_normalize), ties by
/// token sequence. Errors: kNoValidPath, kConfig.
std::vector<BeamHypothesis> constrained_beam_search(const LanguageModel& model,
                                                    const Prompt& prompt,
                                                    const ConstraintAutomaton& automaton,
                                                    const BeamConfig& config);

struct Candidate {
  std::size_t record = 0;
  std::string surface;
  std::string doc_key;
  double score = 0.0;
};

/// Ranked candidates, one per document.
using RankedList = std::vector<Candidate>;

/// Aggregates hypotheses per document with log-sum-exp and ranks documents by
/// the aggregate, ties by doc_key. Each document is represented by the record
/// of its best hypothesis.
RankedList merge_views(const ConstraintAutomaton& automaton,
                       const std::vector<BeamHypothesis>& beams);

/// Keeps the best candidate per doc_key, orders by (score desc, surface asc)
/// and truncates to k.
RankedList dedup_rank(std::vector<Candidate> candidates, std::size_t k);

/// Stable numeric log(sum(exp(x))).
double log_sum_exp(const std::vector<double>& xs);

}  // namespace gentrieval
