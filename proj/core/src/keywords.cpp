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
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "gentrieval/docid.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",     "about", "above", "after", "again", "against", "all",   "am",    "an",
      "and",   "any",   "are",   "as",    "at",    "be",      "because", "been", "before",
      "being", "below", "between", "both", "but",  "by",      "can",   "could", "did",
      "do",    "does",  "doing", "down",  "during", "each",   "few",   "for",   "from",
      "further", "had", "has",   "have",  "having", "he",     "her",   "here",  "hers",
      "him",   "his",   "how",   "i",     "if",    "in",      "into",  "is",    "it",
      "its",   "itself", "just", "me",    "more",  "most",    "my",    "no",    "nor",
      "not",   "now",   "of",    "off",   "on",    "once",    "only",  "or",    "other",
      "our",   "ours",  "out",   "over",  "own",   "same",    "she",   "should", "so",
      "some",  "such",  "than",  "that",  "the",   "their",   "theirs", "them", "then",
      "there", "these", "they",  "this",  "those", "through", "to",    "too",   "under",
      "until", "up",    "very",  "was",   "we",    "were",    "what",  "when",  "where",
      "which", "while", "who",   "whom",  "why",   "will",    "with",  "would", "you",
      "your",  "yours", "s",     "t",     "also",  "may",     "might", "must",  "shall",
  };
  return words;
}

bool has_letter(std::string_view word) {
  return std::any_of(word.begin(), word.end(), [](unsigned char c) {
    return std::isalpha(c) || c >= 0x80;
  });
}

bool has_word_char(std::string_view word) {
  return std::any_of(word.begin(), word.end(), [](unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
  });
}

using TermCounts = std::map<std::string, int>;

TermCounts keyword_counts(std::string_view text) {
  TermCounts counts;
  for (const auto& piece : split_words(text)) {
    if (has_letter(piece.word) && !is_stopword(piece.word)) ++counts[piece.word];
  }
  return counts;
}

void add_label_words(std::string_view label, std::set<std::string>& out) {
  for (const auto& piece : split_words(label)) out.insert(piece.word);
}

}  // namespace

bool is_stopword(std::string_view word) noexcept { return stopwords().contains(word); }

double tfidf_score(double tf, std::size_t df, std::size_t n_docs) noexcept {
  if (df == 0) return 0.0;
  return tf * std::log(1.0 + static_cast<double>(n_docs) / static_cast<double>(df));
}

RqHierarchy assign_keywords(RqHierarchy hierarchy, const Corpus& corpus) {
  std::map<std::string, TermCounts> doc_terms;
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto counts = keyword_counts(doc.text);
    for (const auto& [term, _] : counts) ++df[term];
    doc_terms.emplace(doc.doc_key, std::move(counts));
  }
  for (const auto& [key, _] : hierarchy.leaf_of) {
    if (!doc_terms.contains(key)) {
      throw Error(Errc::kUnknownDoc, "hierarchy document '" + key + "' not in corpus");
    }
  }
  const std::size_t n_docs = corpus.size();

  auto& nodes = hierarchy.nodes;
  for (std::size_t parent = 0; parent < nodes.size(); ++parent) {
    std::set<std::string> used;
    for (std::optional<std::size_t> a = parent; a.has_value(); a = nodes[*a].parent) {
      add_label_words(nodes[*a].label, used);
    }
    std::size_t ordinal = 0;
    for (std::size_t child : nodes[parent].children) {
      ++ordinal;
      TermCounts tf;
      for (const auto& key : nodes[child].doc_keys) {
        for (const auto& [term, count] : doc_terms.at(key)) tf[term] += count;
      }
      std::vector<std::pair<double, std::string>> ranked;
      ranked.reserve(tf.size());
      for (const auto& [term, count] : tf) {
        ranked.emplace_back(tfidf_score(count, df.at(term), n_docs), term);
      }
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });

      std::string label;
      for (const auto& [score, term] : ranked) {
        if (!used.contains(term)) {
          label = term;
          break;
        }
      }
      if (label.empty()) {
        const std::string best = ranked.empty() ? std::string("node") : ranked.front().second;
        label = best + "-" + std::to_string(ordinal);
      }
      nodes[child].label = label;
      add_label_words(label, used);
    }
  }
  return hierarchy;
}

std::vector<std::string> word_ngrams(std::string_view text, int order) {
  std::vector<std::string> words;
  for (auto& piece : split_words(text)) {
    if (has_word_char(piece.word)) words.push_back(std::move(piece.word));
  }
  std::vector<std::string> grams;
  if (order < 1 || words.size() < static_cast<std::size_t>(order)) return grams;
  for (std::size_t i = 0; i + order <= words.size(); ++i) {
    std::string g = words[i];
    for (int j = 1; j < order; ++j) {
      g.push_back(' ');
      g += words[i + j];
    }
    grams.push_back(std::move(g));
  }
  return grams;
}

NgramStatistics NgramStatistics::build(const Corpus& corpus, int order) {
  NgramStatistics stats;
  stats.order = order;
  stats.n_docs = corpus.size();
  for (const auto& doc : corpus) {
    auto grams = word_ngrams(doc.text, order);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++stats.df[g];
  }
  return stats;
}

}  // namespace gentrieval
