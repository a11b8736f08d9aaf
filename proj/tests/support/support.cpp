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

#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gentrieval::testing {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string word_name(std::size_t i) {
  std::string s = "z";
  do {
    s.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  return s;
}

}  // namespace

std::shared_ptr<const DocIdIndex> index_from_surfaces(
    const std::vector<std::pair<std::string, std::string>>& records,
    const std::vector<std::string>& extra_words) {
  auto vocab = std::make_shared<Vocabulary>();
  std::vector<DocIdRecord> out;
  for (const auto& [key, surface] : records) {
    out.push_back(make_record(*vocab, key, DocIdView::kPath, surface));
  }
  for (const auto& w : extra_words) vocab->add(w);
  vocab->freeze();
  return std::make_shared<const DocIdIndex>(vocab, std::move(out));
}

std::shared_ptr<const DocIdIndex> toy_index() {
  return index_from_surfaces({{"d1", "food-apple"}, {"d2", "tech-apple"}, {"d3", "food-banana"}});
}

std::string toy_script_json() {
  return R"([
    {"generated": "", "distribution": {"food": 0.7, "tech": 0.3}},
    {"generated": "food", "distribution": {"apple": 0.6, "banana": 0.4}},
    {"generated": "tech", "distribution": {"apple": 1.0}},
    {"generated": "food apple", "distribution": {"<end>": 1.0}},
    {"generated": "food banana", "distribution": {"<end>": 1.0}},
    {"generated": "tech apple", "distribution": {"<end>": 1.0}}
  ])";
}

RandomTableModel::RandomTableModel(std::size_t vocab_size, std::uint64_t seed, double spread)
    : vocab_size_(vocab_size), seed_(seed), spread_(spread) {}

TokenDistribution RandomTableModel::next_token_distribution(const LmContext& ctx) const {
  std::uint64_t h = mix(seed_);
  for (TokenId t : ctx.prompt.tokens) h = mix(h ^ t);
  h = mix(h ^ 0x5eedULL);
  for (TokenId t : ctx.generated) h = mix(h ^ (t + 1));
  std::vector<double> logits(vocab_size_);
  double max = -1e300;
  for (std::size_t v = 0; v < vocab_size_; ++v) {
    const double u = static_cast<double>(mix(h ^ ((v + 1) * 0x9e3779b97f4a7c15ULL)) >> 11) *
                     0x1.0p-53;
    logits[v] = spread_ * u;
    max = std::max(max, logits[v]);
  }
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max);
  const double lse = max + std::log(sum);
  for (double& l : logits) l -= lse;
  return TokenDistribution{std::move(logits)};
}

std::string RandomTableModel::generate(const GenerationRequest&) const { return {}; }

TokenSeq joined_text(const std::vector<TokenSeq>& bodies) {
  TokenSeq text{kSepToken};
  for (const auto& b : bodies) {
    text.insert(text.end(), b.begin(), b.end());
    text.push_back(kSepToken);
  }
  return text;
}

namespace {

template <typename Fn>
void for_each_occurrence(const TokenSeq& text, std::span<const TokenId> pattern, Fn fn) {
  if (pattern.size() > text.size()) return;
  for (std::size_t i = 0; i + pattern.size() <= text.size(); ++i) {
    if (std::equal(pattern.begin(), pattern.end(), text.begin() + static_cast<std::ptrdiff_t>(i))) {
      fn(i);
    }
  }
}

}  // namespace

std::size_t naive_count(const TokenSeq& text, std::span<const TokenId> pattern) {
  std::size_t n = 0;
  for_each_occurrence(text, pattern, [&](std::size_t) { ++n; });
  return n;
}

std::vector<TokenId> naive_followers(const TokenSeq& text, std::span<const TokenId> pattern) {
  std::set<TokenId> out;
  for_each_occurrence(text, pattern, [&](std::size_t i) {
    const std::size_t next = i + pattern.size();
    if (next < text.size() && text[next] != kSepToken) out.insert(text[next]);
  });
  return {out.begin(), out.end()};
}

bool naive_followed_by_sep(const TokenSeq& text, std::span<const TokenId> pattern) {
  bool found = false;
  for_each_occurrence(text, pattern, [&](std::size_t i) {
    const std::size_t next = i + pattern.size();
    found = found || (next < text.size() && text[next] == kSepToken);
  });
  return found;
}

std::vector<TokenSeq> language_of(Strategy strategy, const DocIdIndex& index) {
  std::set<TokenSeq> out;
  for (const auto& record : index.records()) {
    const TokenSeq body(record.body().begin(), record.body().end());
    switch (strategy) {
      case Strategy::kTrie: {
        TokenSeq s = body;
        s.push_back(kEndToken);
        out.insert(std::move(s));
        break;
      }
      case Strategy::kFmIndex: {
        for (std::size_t i = 0; i < body.size(); ++i) {
          TokenSeq s(body.begin() + static_cast<std::ptrdiff_t>(i), body.end());
          s.push_back(kEndToken);
          out.insert(std::move(s));
        }
        break;
      }
      case Strategy::kTermSet: {
        TokenSeq s = body;
        std::sort(s.begin(), s.end());
        do {
          TokenSeq t = s;
          t.push_back(kEndToken);
          out.insert(std::move(t));
        } while (std::next_permutation(s.begin(), s.end()));
        break;
      }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<ScoredSeq> exhaustive_ranking(const LanguageModel& model, const Prompt& prompt,
                                          Strategy strategy, const DocIdIndex& index) {
  std::vector<ScoredSeq> ranked;
  for (auto& seq : language_of(strategy, index)) {
    const double score = model.sequence_logprob(prompt, seq);
    ranked.push_back({std::move(seq), score});
  }
  std::sort(ranked.begin(), ranked.end(), [](const ScoredSeq& a, const ScoredSeq& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  });
  return ranked;
}

std::size_t brute_nearest(const std::vector<double>& point,
                          const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = 0.0;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    double d = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
      d += (point[i] - centroids[c][i]) * (point[i] - centroids[c][i]);
    }
    if (c == 0 || d < best_d) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

std::shared_ptr<const DocIdIndex> random_index(std::mt19937_64& rng, std::size_t n_records,
                                               std::size_t vocab_words, std::size_t max_len) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < vocab_words; ++i) words.push_back(word_name(i));
  std::uniform_int_distribution<std::size_t> pick(0, vocab_words - 1);
  std::uniform_int_distribution<std::size_t> length(1, max_len);

  auto vocab = std::make_shared<Vocabulary>();
  for (const auto& w : words) vocab->add(w);
  std::vector<DocIdRecord> records;
  for (std::size_t r = 0; r < n_records; ++r) {
    const std::size_t len = length(rng);
    std::string surface;
    for (std::size_t i = 0; i < len; ++i) {
      if (i > 0) surface += '-';
      surface += words[pick(rng)];
    }
    records.push_back(make_record(*vocab, "r" + std::to_string(r), DocIdView::kPath, surface));
  }
  vocab->freeze();
  return std::make_shared<const DocIdIndex>(vocab, std::move(records));
}

Corpus random_corpus(std::mt19937_64& rng, std::size_t n_docs, std::size_t pool,
                     std::size_t min_words, std::size_t max_words) {
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::uniform_int_distribution<std::size_t> length(min_words, max_words);
  Corpus corpus;
  for (std::size_t d = 0; d < n_docs; ++d) {
    Document doc;
    char key[32];
    std::snprintf(key, sizeof key, "doc%04zu", d);
    doc.doc_key = key;
    const std::size_t len = length(rng);
    for (std::size_t i = 0; i < len; ++i) {
      if (i > 0) doc.text += ' ';
      doc.text += word_name(pick(rng));
    }
    corpus.add(std::move(doc));
  }
  return corpus;
}

std::filesystem::path fresh_temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("gentrieval_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(GENTRIEVAL_TEST_DATA_DIR) / name;
}

}  // namespace gentrieval::testing
