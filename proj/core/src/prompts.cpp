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

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gentrieval/error.hpp"
#include "gentrieval/reasoning.hpp"

namespace gentrieval {

namespace {

constexpr std::array<std::string_view, 5> kKnownSlots = {"query", "docid", "context",
                                                         "explanation", "document"};

constexpr std::array<PromptKind, 6> kKinds = {PromptKind::kIndexing,  PromptKind::kRetrieval,
                                              PromptKind::kDirectCot, PromptKind::kThink,
                                              PromptKind::kVerify,    PromptKind::kReflect};

constexpr std::string_view kRetrievalPrompt =
    "You are a retrieval assistant. \n"
    "Given a query, output identifiers for potentially\n"
    "relevant document (each identifier is a hyphen-\n"
    "separated set of key phrases for that document).";

constexpr std::string_view kIndexingPrompt =
    "You are a retrieval assistant. \n"
    "Given a document, output identifiers for \n"
    "potentially relevant document (each identifier is \n"
    "a hyphen-separated set of key phrases for that \n"
    "document).";

constexpr std::string_view kDirectCotPrompt =
    "You are a QA assistant. \n"
    "Given a query, think step by step about the answer \n"
    "and which documents are likely to contain it.";

constexpr std::string_view kThinkPrompt =
    "You are a retrieval reasoning assistant. Think about what the query is after "
    "before any identifier is generated.\n"
    "Query: {query}\n"
    "Reply with exactly two tagged blocks:\n"
    "<context>at most 15 words of key phrases, phrased like a document identifier</context>\n"
    "<explanation>why these key phrases point at the right document</explanation>";

constexpr std::string_view kVerifyPrompt =
    "You are a relevance judge.\n"
    "Query: {query}\n"
    "Candidate document identifier: {docid}\n"
    "Is the candidate relevant to the query? Answer with one word: relevant or irrelevant.";

constexpr std::string_view kReflectPrompt =
    "You are a retrieval reasoning assistant. Reflect on a retrieval mistake.\n"
    "Query: {query}\n"
    "Identifier judged irrelevant: {docid}\n"
    "Current context: {context}\n"
    "Current explanation: {explanation}\n"
    "Change as few words as possible: fix only the phrases that led to the wrong identifier "
    "and keep everything else. Reply with exactly two tagged blocks:\n"
    "<context>revised key phrases</context>\n"
    "<explanation>revised rationale</explanation>";

std::size_t slot_of(PromptKind kind) { return static_cast<std::size_t>(kind); }

}  // namespace

std::string_view prompt_key(PromptKind kind) noexcept {
  switch (kind) {
    case PromptKind::kIndexing: return "P_i";
    case PromptKind::kRetrieval: return "P_r";
    case PromptKind::kDirectCot: return "P_d";
    case PromptKind::kThink: return "P_t";
    case PromptKind::kVerify: return "P_v";
    case PromptKind::kReflect: return "P_f";
  }
  return "";
}

std::string render_template(std::string_view tmpl, std::span<const Slot> slots) {
  std::vector<bool> used(slots.size(), false);
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        bool known = false;
        for (auto k : kKnownSlots) known = known || k == name;
        if (known) {
          bool bound = false;
          for (std::size_t s = 0; s < slots.size(); ++s) {
            if (slots[s].name == name) {
              out.append(slots[s].value);
              used[s] = true;
              bound = true;
              break;
            }
          }
          if (!bound) {
            throw Error(Errc::kConfig, "template slot {" + std::string(name) + "} is not bound");
          }
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (used[s] || slots[s].value.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out.append(slots[s].value);
  }
  return out;
}

PromptRegistry::PromptRegistry() {
  templates_[slot_of(PromptKind::kIndexing)] = kIndexingPrompt;
  templates_[slot_of(PromptKind::kRetrieval)] = kRetrievalPrompt;
  templates_[slot_of(PromptKind::kDirectCot)] = kDirectCotPrompt;
  templates_[slot_of(PromptKind::kThink)] = kThinkPrompt;
  templates_[slot_of(PromptKind::kVerify)] = kVerifyPrompt;
  templates_[slot_of(PromptKind::kReflect)] = kReflectPrompt;
}

PromptRegistry PromptRegistry::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kConfig, std::string("prompt file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::kConfig, "prompt file must hold a JSON object");
  PromptRegistry reg;
  for (PromptKind kind : kKinds) {
    auto it = doc.find(std::string(prompt_key(kind)));
    if (it == doc.end()) continue;
    if (!it->is_string()) {
      throw Error(Errc::kConfig, "prompt " + std::string(prompt_key(kind)) + " must be a string");
    }
    reg.set(kind, it->get<std::string>());
  }
  return reg;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open prompt file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

const std::string& PromptRegistry::get(PromptKind kind) const { return templates_[slot_of(kind)]; }

void PromptRegistry::set(PromptKind kind, std::string text) {
  templates_[slot_of(kind)] = std::move(text);
}

std::vector<std::string> PromptRegistry::all() const {
  return {std::begin(templates_), std::end(templates_)};
}

std::string retrieval_prompt(const PromptRegistry& prompts, std::string_view query,
                             std::string_view auxiliary) {
  const Slot slots[] = {{"query", query}, {"context", auxiliary}};
  return render_template(prompts.get(PromptKind::kRetrieval), slots);
}

std::string indexing_prompt(const PromptRegistry& prompts, std::string_view document) {
  const Slot slots[] = {{"document", document}};
  return render_template(prompts.get(PromptKind::kIndexing), slots);
}

}  // namespace gentrieval
