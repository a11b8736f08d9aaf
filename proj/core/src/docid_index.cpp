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
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gentrieval/docid.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kIndexFormat = "gentrieval.docid_index/1";

ojson node_to_json(const RqHierarchy& h, std::size_t id) {
  const RqNode& node = h.nodes[id];
  ojson j;
  j["label"] = node.label;
  j["level"] = node.level;
  if (node.document_level) j["document_level"] = true;
  j["centroid"] = node.centroid;
  if (node.children.empty()) {
    j["docs"] = node.doc_keys;
  } else {
    ojson children = ojson::array();
    for (std::size_t c : node.children) children.push_back(node_to_json(h, c));
    j["children"] = std::move(children);
  }
  return j;
}

std::size_t node_from_json(const ojson& j, std::optional<std::size_t> parent, RqHierarchy& h) {
  const std::size_t id = h.nodes.size();
  h.nodes.emplace_back();
  {
    RqNode& node = h.nodes.back();
    node.label = j.at("label").get<std::string>();
    node.level = j.at("level").get<int>();
    node.document_level = j.value("document_level", false);
    node.parent = parent;
    node.centroid = j.at("centroid").get<std::vector<double>>();
  }
  if (auto it = j.find("children"); it != j.end()) {
    std::vector<std::size_t> children;
    std::vector<std::string> keys;
    for (const auto& c : *it) {
      const std::size_t child = node_from_json(c, id, h);
      children.push_back(child);
      const auto& ck = h.nodes[child].doc_keys;
      keys.insert(keys.end(), ck.begin(), ck.end());
    }
    std::sort(keys.begin(), keys.end());
    h.nodes[id].children = std::move(children);
    h.nodes[id].doc_keys = std::move(keys);
  } else {
    h.nodes[id].doc_keys = j.at("docs").get<std::vector<std::string>>();
    for (const auto& key : h.nodes[id].doc_keys) h.leaf_of[key] = id;
  }
  return id;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string_view to_string(DocIdView view) noexcept {
  switch (view) {
    case DocIdView::kPath: return "path";
    case DocIdView::kTitle: return "title";
    case DocIdView::kNgram: return "ngram";
    case DocIdView::kPseudoQuery: return "pseudo_query";
  }
  return "path";
}

DocIdView parse_view(std::string_view name) {
  for (auto v : {DocIdView::kPath, DocIdView::kTitle, DocIdView::kNgram, DocIdView::kPseudoQuery}) {
    if (to_string(v) == name) return v;
  }
  throw Error(Errc::kConfig, "unknown docid view '" + std::string(name) + "'");
}

DocIdRecord make_record(Vocabulary& vocab, std::string doc_key, DocIdView view,
                        std::string surface) {
  DocIdRecord r;
  r.doc_key = std::move(doc_key);
  r.view = view;
  r.tokens = tokenize(vocab, surface);
  r.tokens.push_back(kEndToken);
  r.surface = std::move(surface);
  return r;
}

DocIdRecord path_docid(std::string_view doc_key, const RqHierarchy& hierarchy,
                       Vocabulary& vocab) {
  std::string surface;
  for (std::size_t node : hierarchy.path(doc_key)) {
    if (!surface.empty()) surface.push_back('-');
    surface += hierarchy.nodes[node].label;
  }
  if (surface.empty()) {
    throw Error(Errc::kInvalidState, "hierarchy has no labels; run assign_keywords first");
  }
  return make_record(vocab, std::string(doc_key), DocIdView::kPath, std::move(surface));
}

std::vector<DocIdRecord> build_views(const Document& doc, const ViewConfig& config,
                                     const NgramStatistics& stats, Vocabulary& vocab) {
  std::vector<DocIdRecord> out;
  auto emit = [&](DocIdView view, const std::string& surface) {
    if (split_words(surface).empty()) return;
    out.push_back(make_record(vocab, doc.doc_key, view, surface));
  };
  if (config.title && doc.title) emit(DocIdView::kTitle, *doc.title);
  if (config.ngram && config.ngram_count > 0) {
    if (stats.order != config.ngram_order) {
      throw Error(Errc::kConfig, "n-gram statistics built for a different order");
    }
    std::map<std::string, int> tf;
    for (auto& g : word_ngrams(doc.text, config.ngram_order)) ++tf[g];
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [gram, count] : tf) {
      auto it = stats.df.find(gram);
      const std::size_t df = it == stats.df.end() ? 1 : it->second;
      ranked.emplace_back(tfidf_score(count, df, stats.n_docs), gram);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::size_t m = std::min<std::size_t>(ranked.size(), config.ngram_count);
    for (std::size_t i = 0; i < m; ++i) emit(DocIdView::kNgram, ranked[i].second);
  }
  if (config.pseudo_query) {
    for (const auto& pq : doc.pseudo_queries) emit(DocIdView::kPseudoQuery, pq);
  }
  return out;
}

DocIdIndex::DocIdIndex(std::shared_ptr<const Vocabulary> vocab, std::vector<DocIdRecord> records,
                       std::optional<RqHierarchy> hierarchy)
    : vocab_(std::move(vocab)), records_(std::move(records)), hierarchy_(std::move(hierarchy)) {
  if (!vocab_) throw Error(Errc::kConfig, "index requires a vocabulary");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const DocIdRecord& r = records_[i];
    if (r.tokens.size() < 2 || r.tokens.back() != kEndToken) {
      throw Error(Errc::kMalformedRecord,
                  "record for '" + r.doc_key + "' must be nonempty and END-terminated");
    }
    for (std::size_t t = 0; t + 1 < r.tokens.size(); ++t) {
      const TokenId id = r.tokens[t];
      if (id < kReservedTokens || !vocab_->contains(id)) {
        throw Error(Errc::kUnknownToken, "record for '" + r.doc_key + "' has an invalid token");
      }
    }
    auto [it, inserted] = by_doc_.try_emplace(r.doc_key);
    if (inserted) doc_keys_.push_back(r.doc_key);
    it->second.push_back(i);
    by_surface_[r.surface].push_back(i);
    max_tokens_ = std::max(max_tokens_, r.tokens.size());
  }
}

std::span<const std::size_t> DocIdIndex::records_of(std::string_view doc_key) const {
  auto it = by_doc_.find(std::string(doc_key));
  if (it == by_doc_.end()) return {};
  return it->second;
}

std::span<const std::size_t> DocIdIndex::records_with_surface(std::string_view surface) const {
  auto it = by_surface_.find(std::string(surface));
  if (it == by_surface_.end()) return {};
  return it->second;
}

DocIdIndex build_docid_index(const Corpus& corpus, const IndexBuildConfig& config,
                             std::span<const std::string> seed_texts) {
  if (corpus.empty()) throw Error(Errc::kEmptyIndex, "cannot index an empty corpus");
  auto vocab = std::make_shared<Vocabulary>();
  for (const auto& text : seed_texts) tokenize(*vocab, text);
  for (const auto& doc : corpus) {
    tokenize(*vocab, doc.text);
    if (doc.title) tokenize(*vocab, *doc.title);
    for (const auto& pq : doc.pseudo_queries) tokenize(*vocab, pq);
  }

  std::vector<DocIdRecord> records;
  std::optional<RqHierarchy> hierarchy;
  if (config.path_view) {
    std::map<std::string, EmbeddingVector> vectors;
    for (const auto& doc : corpus) {
      vectors.emplace(doc.doc_key, embed_document(doc, config.dim, config.seed));
    }
    hierarchy = assign_keywords(build_rq_hierarchy(vectors, config.rq), corpus);
    std::unordered_set<std::string> seen;
    for (const auto& doc : corpus) {
      records.push_back(path_docid(doc.doc_key, *hierarchy, *vocab));
      if (!seen.insert(records.back().surface).second) {
        throw Error(Errc::kDegenerateInput,
                    "path identifier collision on '" + records.back().surface + "'");
      }
    }
  }
  const bool any_view = config.views.title || config.views.ngram || config.views.pseudo_query;
  if (any_view) {
    NgramStatistics stats;
    if (config.views.ngram) stats = NgramStatistics::build(corpus, config.views.ngram_order);
    for (const auto& doc : corpus) {
      for (auto& r : build_views(doc, config.views, stats, *vocab)) records.push_back(std::move(r));
    }
  }
  std::unordered_set<std::string> covered;
  for (const auto& r : records) covered.insert(r.doc_key);
  for (const auto& doc : corpus) {
    if (!covered.contains(doc.doc_key)) {
      throw Error(Errc::kConfig, "document '" + doc.doc_key + "' received no identifier");
    }
  }
  vocab->freeze();
  return DocIdIndex(std::move(vocab), std::move(records), std::move(hierarchy));
}

std::string serialize_index(const DocIdIndex& index) {
  ojson j;
  j["format"] = kIndexFormat;
  j["vocab"] = index.vocab().words();
  ojson records = ojson::array();
  for (const auto& r : index.records()) {
    ojson jr;
    jr["doc"] = r.doc_key;
    jr["view"] = to_string(r.view);
    jr["surface"] = r.surface;
    jr["tokens"] = r.tokens;
    records.push_back(std::move(jr));
  }
  j["records"] = std::move(records);
  if (const auto& h = index.hierarchy()) {
    ojson jh;
    jh["levels"] = h->levels;
    jh["branching"] = h->branching;
    jh["dim"] = h->dim;
    jh["root"] = node_to_json(*h, 0);
    j["hierarchy"] = std::move(jh);
  } else {
    j["hierarchy"] = nullptr;
  }
  return j.dump(1) + "\n";
}

DocIdIndex deserialize_index(std::string_view json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
    if (j.value("format", std::string()) != kIndexFormat) {
      throw Error(Errc::kMalformedRecord, "not a gentrieval docid index");
    }
    auto vocab = std::make_shared<Vocabulary>(
        Vocabulary::from_words(j.at("vocab").get<std::vector<std::string>>()));
    vocab->freeze();
    std::vector<DocIdRecord> records;
    for (const auto& jr : j.at("records")) {
      DocIdRecord r;
      r.doc_key = jr.at("doc").get<std::string>();
      r.view = parse_view(jr.at("view").get<std::string>());
      r.surface = jr.at("surface").get<std::string>();
      r.tokens = jr.at("tokens").get<TokenSeq>();
      records.push_back(std::move(r));
    }
    std::optional<RqHierarchy> hierarchy;
    if (const auto& jh = j.at("hierarchy"); !jh.is_null()) {
      RqHierarchy h;
      h.levels = jh.at("levels").get<int>();
      h.branching = jh.at("branching").get<int>();
      h.dim = jh.at("dim").get<std::size_t>();
      node_from_json(jh.at("root"), std::nullopt, h);
      hierarchy = std::move(h);
    }
    return DocIdIndex(std::move(vocab), std::move(records), std::move(hierarchy));
  } catch (const ojson::exception& e) {
    throw Error(Errc::kMalformedRecord, std::string("index file: ") + e.what());
  }
}

void save_index(const DocIdIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << serialize_index(index);
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

DocIdIndex load_index(const std::filesystem::path& path) {
  return deserialize_index(read_file(path));
}

}  // namespace gentrieval
