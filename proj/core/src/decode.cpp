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

#include "gentrieval/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

struct Live {
  TokenSeq tokens;
  double score;
  AutomatonState state;
};

bool better(double sa, const TokenSeq& ta, double sb, const TokenSeq& tb) {
  if (sa != sb) return sa > sb;
  return ta < tb;
}

}  // namespace

double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

std::vector<BeamHypothesis> constrained_beam_search(const LanguageModel& model,
                                                    const Prompt& prompt,
                                                    const ConstraintAutomaton& automaton,
                                                    const BeamConfig& config) {
  if (config.beam_width < 1) throw Error(Errc::kConfig, "beam width must be at least 1");
  const auto width = static_cast<std::size_t>(config.beam_width);
  const std::size_t max_len = config.max_len > 0 ? static_cast<std::size_t>(config.max_len)
                                                 : automaton.index().max_tokens();
  if (max_len < automaton.index().max_tokens()) {
    throw Error(Errc::kConfig, "max_len is shorter than the longest identifier");
  }

  const AutomatonState start = automaton.start();
  {
    const AllowedSet first = automaton.allowed(start);
    if (first.tokens.empty() && !first.end_allowed) {
      throw Error(Errc::kNoValidPath, "the automaton admits no token at the start");
    }
  }

  std::vector<Live> live{{{}, 0.0, start}};
  std::vector<BeamHypothesis> finished;
  auto final_score = [&](const BeamHypothesis& h) {
    return config.length_normalize ? h.score / static_cast<double>(h.tokens.size()) : h.score;
  };
  auto finished_order = [&](const BeamHypothesis& a, const BeamHypothesis& b) {
    return better(final_score(a), a.tokens, final_score(b), b.tokens);
  };

  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<Live> next;
    for (const Live& hyp : live) {
      const TokenDistribution dist = model.next_token_distribution({prompt, hyp.tokens});
      const AllowedSet allowed = automaton.allowed(hyp.state);
      if (allowed.end_allowed) {
        BeamHypothesis done;
        done.tokens = hyp.tokens;
        done.tokens.push_back(kEndToken);
        done.score = hyp.score + dist.logprob(kEndToken);
        done.records = automaton.complete(hyp.state);
        finished.push_back(std::move(done));
      }
      if (step + 2 > max_len) continue;  // no room left for END after another token
      for (TokenId t : allowed.tokens) {
        Live child{hyp.tokens, hyp.score + dist.logprob(t), automaton.step(hyp.state, t)};
        child.tokens.push_back(t);
        next.push_back(std::move(child));
      }
    }

    std::sort(finished.begin(), finished.end(), finished_order);
    if (finished.size() > width) finished.resize(width);

    if (next.size() > width) {
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(width), next.end(),
                        [](const Live& a, const Live& b) {
                          return better(a.score, a.tokens, b.score, b.tokens);
                        });
      next.resize(width);
    } else {
      std::sort(next.begin(), next.end(), [](const Live& a, const Live& b) {
        return better(a.score, a.tokens, b.score, b.tokens);
      });
    }
    live = std::move(next);

    // Log-probs are non-positive, so no live hypothesis can overtake a full
    // pool whose worst entry already scores higher.
    if (!config.length_normalize && finished.size() == width && !live.empty() &&
        live.front().score < finished.back().score) {
      break;
    }
  }
  if (config.length_normalize) {
    for (auto& h : finished) h.score = final_score(h);
  }
  return finished;
}

RankedList merge_views(const ConstraintAutomaton& automaton,
                       const std::vector<BeamHypothesis>& beams) {
  struct Acc {
    std::vector<double> scores;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t record = 0;
  };
  std::map<std::string, Acc> per_doc;
  for (const auto& hyp : beams) {
    std::map<std::string_view, std::size_t> docs;  // doc -> first record in this hypothesis
    for (std::size_t r : hyp.records) {
      docs.emplace(automaton.index().record(r).doc_key, r);
    }
    for (const auto& [doc, record] : docs) {
      Acc& acc = per_doc[std::string(doc)];
      acc.scores.push_back(hyp.score);
      if (hyp.score > acc.best) {
        acc.best = hyp.score;
        acc.record = record;
      }
    }
  }
  RankedList out;
  out.reserve(per_doc.size());
  for (auto& [doc, acc] : per_doc) {
    const auto& rec = automaton.index().record(acc.record);
    out.push_back({acc.record, rec.surface, doc, log_sum_exp(acc.scores)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_key < b.doc_key;
  });
  return out;
}

RankedList dedup_rank(std::vector<Candidate> candidates, std::size_t k) {
  auto order = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.surface != b.surface) return a.surface < b.surface;
    return a.doc_key < b.doc_key;
  };
  std::sort(candidates.begin(), candidates.end(), order);
  RankedList out;
  std::set<std::string> seen;
  for (auto& c : candidates) {
    if (out.size() >= k) break;
    if (!seen.insert(c.doc_key).second) continue;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace gentrieval
