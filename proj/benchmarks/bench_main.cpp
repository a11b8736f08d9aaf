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

#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "gentrieval/constraint.hpp"
#include "gentrieval/decode.hpp"
#include "gentrieval/docid.hpp"
#include "gentrieval/lm.hpp"

namespace {

using namespace gentrieval;

Corpus synthetic_corpus(std::size_t n_docs) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> word(0, 399);
  std::uniform_int_distribution<int> length(8, 24);
  std::string jsonl;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::string text;
    for (int i = length(rng); i > 0; --i) text += "w" + std::to_string(word(rng)) + " ";
    jsonl += "{\"id\": \"d" + std::to_string(d) + "\", \"text\": \"" + text + "\"}\n";
  }
  return parse_corpus(jsonl);
}

std::shared_ptr<const DocIdIndex> synthetic_index(std::size_t n_docs) {
  IndexBuildConfig config;
  config.rq.levels = 3;
  config.rq.branching = 8;
  return std::make_shared<const DocIdIndex>(build_docid_index(synthetic_corpus(n_docs), config));
}

void BM_BuildIndex(benchmark::State& state) {
  const Corpus corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
  IndexBuildConfig config;
  config.rq.levels = 3;
  config.rq.branching = 8;
  for (auto _ : state) benchmark::DoNotOptimize(build_docid_index(corpus, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BuildAutomaton(benchmark::State& state) {
  const auto index = synthetic_index(static_cast<std::size_t>(state.range(1)));
  const auto strategy = static_cast<Strategy>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_automaton(strategy, index));
  state.SetLabel(std::string(to_string(strategy)));
}
BENCHMARK(BM_BuildAutomaton)
    ->ArgsProduct({{static_cast<int>(Strategy::kTrie), static_cast<int>(Strategy::kFmIndex),
                    static_cast<int>(Strategy::kTermSet)},
                   {1000}})
    ->Unit(benchmark::kMillisecond);

void BM_BeamSearch(benchmark::State& state) {
  const auto index = synthetic_index(1000);
  const auto strategy = static_cast<Strategy>(state.range(0));
  const auto automaton = build_automaton(strategy, index);
  const NgramModel model(index->vocab_ptr(), 3);
  const Prompt prompt = encode_prompt(index->vocab(), "w1 w2 w3");
  BeamConfig config;
  config.beam_width = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(constrained_beam_search(model, prompt, *automaton, config));
  }
  state.SetLabel(std::string(to_string(strategy)));
}
BENCHMARK(BM_BeamSearch)
    ->ArgsProduct({{static_cast<int>(Strategy::kTrie), static_cast<int>(Strategy::kFmIndex),
                    static_cast<int>(Strategy::kTermSet)},
                   {5, 20}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
