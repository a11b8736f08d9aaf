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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gentrieval/corpus.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(Errc::kIo, "read failed for " + path.string());
  return buffer.str();
}

template <typename Fn>
void for_each_record(std::string_view jsonl, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    const std::size_t nl = jsonl.find('\n', pos);
    const std::string_view line =
        jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      json record;
      try {
        record = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(Errc::kMalformedRecord,
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!record.is_object()) {
        throw Error(Errc::kMalformedRecord,
                    "line " + std::to_string(line_no) + ": expected a JSON object");
      }
      fn(record, line_no);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

std::string required_string(const json& record, const char* field, std::size_t line_no) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw Error(Errc::kMalformedRecord, "line " + std::to_string(line_no) +
                                            ": missing string field '" + field + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> optional_strings(const json& record, const char* field,
                                          std::size_t line_no) {
  std::vector<std::string> out;
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return out;
  if (!it->is_array()) {
    throw Error(Errc::kMalformedRecord,
                "line " + std::to_string(line_no) + ": '" + field + "' must be an array");
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error(Errc::kMalformedRecord, "line " + std::to_string(line_no) + ": '" +
                                              field + "' must contain strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Corpus::Corpus(std::vector<Document> documents) {
  for (auto& doc : documents) add(std::move(doc));
}

void Corpus::add(Document doc) {
  if (doc.doc_key.empty()) throw Error(Errc::kMalformedRecord, "empty doc key");
  if (doc.text.empty()) {
    throw Error(Errc::kMalformedRecord, "document '" + doc.doc_key + "' has empty text");
  }
  if (by_key_.contains(doc.doc_key)) throw Error(Errc::kDuplicateKey, doc.doc_key);
  by_key_.emplace(doc.doc_key, documents_.size());
  documents_.push_back(std::move(doc));
}

std::optional<std::size_t> Corpus::position(std::string_view key) const {
  if (auto it = by_key_.find(std::string(key)); it != by_key_.end()) return it->second;
  return std::nullopt;
}

const Document& Corpus::at(std::string_view key) const {
  auto pos = position(key);
  if (!pos) throw Error(Errc::kUnknownDoc, std::string(key));
  return documents_[*pos];
}

Corpus parse_corpus(std::string_view jsonl) {
  Corpus corpus;
  for_each_record(jsonl, [&](const json& record, std::size_t line_no) {
    Document doc;
    doc.doc_key = required_string(record, "id", line_no);
    doc.text = required_string(record, "text", line_no);
    if (auto it = record.find("title"); it != record.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw Error(Errc::kMalformedRecord,
                    "line " + std::to_string(line_no) + ": 'title' must be a string");
      }
      doc.title = it->get<std::string>();
    }
    doc.pseudo_queries = optional_strings(record, "pseudo_queries", line_no);
    if (doc.doc_key.empty() || doc.text.empty()) {
      throw Error(Errc::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": id and text must be nonempty");
    }
    corpus.add(std::move(doc));
  });
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) { return parse_corpus(read_file(path)); }

std::vector<Query> parse_queries(std::string_view jsonl) {
  std::vector<Query> queries;
  for_each_record(jsonl, [&](const json& record, std::size_t line_no) {
    Query q;
    q.query_id = required_string(record, "qid", line_no);
    q.text = required_string(record, "text", line_no);
    for (auto& key : optional_strings(record, "relevant", line_no)) {
      q.relevant_keys.insert(std::move(key));
    }
    if (q.text.empty()) {
      throw Error(Errc::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": query text must be nonempty");
    }
    queries.push_back(std::move(q));
  });
  return queries;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  return parse_queries(read_file(path));
}

}  // namespace gentrieval
