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

#include <cctype>
#include <cmath>
#include <map>

#include "gentrieval/docid.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_word(std::string_view word, std::uint64_t seed) {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ splitmix64(seed);
  for (unsigned char c : word) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(h);
}

bool has_word_char(std::string_view word) {
  for (unsigned char c : word) {
    if (std::isalnum(c) || c >= 0x80) return true;
  }
  return false;
}

}  // namespace

EmbeddingVector embed_text(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 2) throw Error(Errc::kDegenerateInput, "embedding dimension must be >= 2");

  std::map<std::string, int> counts;
  std::map<std::string, int> fallback;
  for (const auto& piece : split_words(text)) {
    if (!has_word_char(piece.word)) continue;
    ++fallback[piece.word];
    if (!is_stopword(piece.word)) ++counts[piece.word];
  }
  if (counts.empty()) counts = std::move(fallback);
  if (counts.empty()) throw Error(Errc::kEmptyDocument, "document has no words");

  EmbeddingVector v{std::vector<double>(dim, 0.0)};
  for (const auto& [word, tf] : counts) {
    const std::uint64_t h = hash_word(word, seed);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v.values[h % dim] += sign * tf;
  }
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  if (norm == 0.0) {
    // Every bucket cancelled out; keep the vector well-defined.
    v.values[hash_word(counts.begin()->first, seed) % dim] = 1.0;
    return v;
  }
  norm = std::sqrt(norm);
  for (double& x : v.values) x /= norm;
  return v;
}

EmbeddingVector embed_document(const Document& doc, std::size_t dim, std::uint64_t seed) {
  if (doc.text.empty()) {
    throw Error(Errc::kEmptyDocument, "document '" + doc.doc_key + "' has empty text");
  }
  return embed_text(doc.text, dim, seed);
}

}  // namespace gentrieval
