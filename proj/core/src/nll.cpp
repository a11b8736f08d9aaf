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

#include "gentrieval/error.hpp"
#include "gentrieval/eval.hpp"

namespace gentrieval {

namespace {

const DocIdRecord& target_record(const DocIdIndex& index, std::string_view doc_key) {
  const auto positions = index.records_of(doc_key);
  if (positions.empty()) {
    throw Error(Errc::kUnknownDoc, "no identifier for document '" + std::string(doc_key) + "'");
  }
  for (std::size_t p : positions) {
    if (index.record(p).view == DocIdView::kPath) return index.record(p);
  }
  return index.record(positions.front());
}

}  // namespace

std::string_view to_string(NllMode mode) noexcept {
  return mode == NllMode::kStandard ? "standard" : "instruction";
}

std::vector<QueryDocPair> query_doc_pairs(std::span<const Query> queries) {
  std::vector<QueryDocPair> pairs;
  for (const Query& q : queries) {
    for (const auto& key : q.relevant_keys) pairs.emplace_back(q.text, key);
  }
  return pairs;
}

std::string nll_prompt(const PromptRegistry& prompts, NllMode mode, bool indexing,
                       std::string_view text) {
  if (mode == NllMode::kStandard) return std::string(text);
  return indexing ? indexing_prompt(prompts, text) : retrieval_prompt(prompts, text);
}

NllReport nll_losses(const LanguageModel& model, const Corpus& corpus,
                     std::span<const QueryDocPair> pairs, const DocIdIndex& index,
                     NllMode mode, const PromptRegistry& prompts) {
  if (!model.is_local()) {
    throw Error(Errc::kNotSupported, "likelihood diagnostics need a local model");
  }
  NllReport report;
  report.mode = mode;
  auto score = [&](std::string text, std::string_view doc_key) {
    NllTerm term;
    term.prompt = std::move(text);
    term.doc_key = std::string(doc_key);
    const Prompt prompt = encode_prompt(index.vocab(), term.prompt);
    term.logprob = model.sequence_logprob(prompt, target_record(index, doc_key).tokens);
    return term;
  };
  for (const Document& doc : corpus) {
    report.indexing_terms.push_back(score(nll_prompt(prompts, mode, true, doc.text), doc.doc_key));
    report.indexing_loss -= report.indexing_terms.back().logprob;
  }
  for (const auto& [query, doc_key] : pairs) {
    report.retrieval_terms.push_back(score(nll_prompt(prompts, mode, false, query), doc_key));
    report.retrieval_loss -= report.retrieval_terms.back().logprob;
  }
  report.total = report.indexing_loss + report.retrieval_loss;
  return report;
}

void train_ngram(NgramModel& model, const Corpus& corpus, std::span<const QueryDocPair> pairs,
                 const DocIdIndex& index, NllMode mode, const PromptRegistry& prompts) {
  const Vocabulary& vocab = index.vocab();
  auto train = [&](const std::string& text, std::string_view doc_key, bool indexing) {
    const TokenSeq prompt = tokenize_lenient(vocab, nll_prompt(prompts, mode, indexing, text));
    model.train(prompt, target_record(index, doc_key).tokens);
  };
  for (const Document& doc : corpus) {
    train(doc.text, doc.doc_key, true);
    for (const auto& pq : doc.pseudo_queries) train(pq, doc.doc_key, false);
  }
  for (const auto& [query, doc_key] : pairs) train(query, doc_key, false);
}

}  // namespace gentrieval
