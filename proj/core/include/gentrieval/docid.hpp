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

/// \file docid.hpp
/// Textual document identifiers.
///
/// The default identifier of a document is a keyword path through a residual
/// quantization (RQ) hierarchy: level-1 k-means clusters the document
/// embeddings, every deeper level clusters the residuals left inside each
/// node, and every node is labeled with one keyword that is distinct from its
/// siblings and its ancestors. The identifier surface is the labels along the
/// root-to-document path joined with "-".
///
/// Leaves that still hold more than one document get one extra
/// document-level child per document, so path identifiers are unique.
///
/// Title, n-gram and pseudo-query views provide additional identifiers per
/// document for multi-view retrieval.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gentrieval/corpus.hpp"

namespace gentrieval {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
};

/// Signed hashed bag-of-words over content words, L2-normalized.
/// Deterministic in (text, dim, seed). Throws kEmptyDocument for text without
/// any word, kDegenerateInput for dim < 2.
EmbeddingVector embed_text(std::string_view text, std::size_t dim, std::uint64_t seed = 0);
EmbeddingVector embed_document(const Document& doc, std::size_t dim, std::uint64_t seed = 0);

struct RqNode {
  std::string label;
  int level = 0;  // 0 for the root
  bool document_level = false;
  std::optional<std::size_t> parent;
  std::vector<double> centroid;
  std::vector<std::size_t> children;
  std::vector<std::string> doc_keys;  // every document below this node, sorted
};

struct RqOptions {
  int levels = 2;
  int branching = 8;
  int max_iterations = 25;
  bool disambiguate_leaves = true;
};

struct RqHierarchy {
  int levels = 0;
  int branching = 0;
  std::size_t dim = 0;
  std::vector<RqNode> nodes;  // nodes[0] is the root; parents precede children
  std::map<std::string, std::size_t> leaf_of;

  const RqNode& root() const { return nodes.front(); }
  /// Node ids from the first level down to the document's leaf (root excluded).
  std::vector<std::size_t> path(std::string_view doc_key) const;
};

/// Builds the RQ tree. Clustering is deterministic: farthest-point
/// initialization starting from the lowest-key member, at most
/// `max_iterations` Lloyd rounds, ties to the lowest centroid index. The
/// branching factor is clamped to the member count of each node.
/// Throws kDegenerateInput on an empty input, mismatched dimensions or
/// non-finite values.
RqHierarchy build_rq_hierarchy(const std::map<std::string, EmbeddingVector>& vectors,
                               const RqOptions& options);

/// Labels every non-root node with its best TF-IDF term (stopwords excluded)
/// not used by an ancestor or an earlier sibling. When nothing is left the
/// label is "<best term>-<sibling ordinal>".
RqHierarchy assign_keywords(RqHierarchy hierarchy, const Corpus& corpus);

/// Score used for keyword and n-gram selection: tf * ln(1 + N / df).
double tfidf_score(double tf, std::size_t df, std::size_t n_docs) noexcept;

bool is_stopword(std::string_view word) noexcept;

enum class DocIdView { kPath, kTitle, kNgram, kPseudoQuery };

std::string_view to_string(DocIdView view) noexcept;
DocIdView parse_view(std::string_view name);

struct DocIdRecord {
  std::string doc_key;
  DocIdView view = DocIdView::kPath;
  std::string surface;
  TokenSeq tokens;  // terminated by kEndToken

  /// The identifier tokens without the trailing END.
  std::span<const TokenId> body() const {
    return {tokens.data(), tokens.empty() ? 0 : tokens.size() - 1};
  }
};

/// Builds a record, tokenizing `surface` (and growing `vocab` if allowed).
DocIdRecord make_record(Vocabulary& vocab, std::string doc_key, DocIdView view,
                        std::string surface);

/// Throws kUnknownDoc if the document has no leaf in `hierarchy`.
DocIdRecord path_docid(std::string_view doc_key, const RqHierarchy& hierarchy,
                       Vocabulary& vocab);

struct ViewConfig {
  bool title = false;
  bool ngram = false;
  bool pseudo_query = false;
  int ngram_count = 3;  // m
  int ngram_order = 3;  // n
};

/// Document frequencies of word n-grams of a fixed order over a corpus.
struct NgramStatistics {
  int order = 0;
  std::size_t n_docs = 0;
  std::unordered_map<std::string, std::size_t> df;

  static NgramStatistics build(const Corpus& corpus, int order);
};

/// Word n-grams of `text` joined by spaces, in order of appearance.
std::vector<std::string> word_ngrams(std::string_view text, int order);

/// Title, n-gram and pseudo-query identifiers of one document. A missing
/// source yields no record.
std::vector<DocIdRecord> build_views(const Document& doc, const ViewConfig& config,
                                     const NgramStatistics& stats, Vocabulary& vocab);

class DocIdIndex {
 public:
  DocIdIndex(std::shared_ptr<const Vocabulary> vocab, std::vector<DocIdRecord> records,
             std::optional<RqHierarchy> hierarchy = std::nullopt);

  const Vocabulary& vocab() const noexcept { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const noexcept { return vocab_; }
  const std::vector<DocIdRecord>& records() const noexcept { return records_; }
  const DocIdRecord& record(std::size_t i) const { return records_.at(i); }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::span<const std::size_t> records_of(std::string_view doc_key) const;
  std::span<const std::size_t> records_with_surface(std::string_view surface) const;
  /// Distinct doc keys in first-record order.
  const std::vector<std::string>& doc_keys() const noexcept { return doc_keys_; }
  /// Longest record including END.
  std::size_t max_tokens() const noexcept { return max_tokens_; }
  const std::optional<RqHierarchy>& hierarchy() const noexcept { return hierarchy_; }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<DocIdRecord> records_;
  std::optional<RqHierarchy> hierarchy_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_doc_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_surface_;
  std::vector<std::string> doc_keys_;
  std::size_t max_tokens_ = 0;
};

struct IndexBuildConfig {
  bool path_view = true;
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  RqOptions rq;
  ViewConfig views;
};

/// Full build: vocabulary (seeded with `seed_texts`, e.g. prompt templates,
/// then every document text, title and pseudo-query in load order), path
/// identifiers and the configured extra views. The vocabulary is frozen on
/// return. Throws kDegenerateInput if path surfaces collide.
DocIdIndex build_docid_index(const Corpus& corpus, const IndexBuildConfig& config,
                             std::span<const std::string> seed_texts = {});

/// Stable JSON with fields vocab, records, hierarchy (in that order).
std::string serialize_index(const DocIdIndex& index);
DocIdIndex deserialize_index(std::string_view json_text);
void save_index(const DocIdIndex& index, const std::filesystem::path& path);
DocIdIndex load_index(const std::filesystem::path& path);

}  // namespace gentrieval
