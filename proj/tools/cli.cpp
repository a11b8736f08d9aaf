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

#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gentrieval/constraint.hpp"
#include "gentrieval/corpus.hpp"
#include "gentrieval/docid.hpp"
#include "gentrieval/error.hpp"
#include "gentrieval/eval.hpp"
#include "gentrieval/lm.hpp"
#include "gentrieval/orchestrator.hpp"
#include "gentrieval/reasoning.hpp"

namespace gentrieval::cli {

namespace {

constexpr const char* kRemoteEnv = "GENTRIEVAL_REMOTE_URL";

struct ModelFlags {
  std::string model = "ngram";
  std::string reasoner;
  std::string corpus;
  std::string train_queries;
  std::string train_mode = "instruction";
  int ngram_order = 3;
  std::string remote;
  int remote_timeout_ms = 30000;
  int remote_retries = 2;
};

struct BuildFlags {
  std::string corpus;
  std::string out;
  std::string prompts;
  std::string queries;
  int levels = 2;
  int branching = 8;
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::vector<std::string> views;
  int ngram_count = 3;
  int ngram_order = 3;
};

struct RetrieveFlags {
  std::string index;
  std::string strategy = "trie";
  std::string prompts;
  std::string query;
  std::string queries;
  int k = 20;
  bool length_normalize = false;
};

struct RunFlags {
  std::string index;
  std::string queries;
  std::string strategy = "trie";
  std::string pipeline = "standard";
  std::string prompts;
  std::string report;
  std::string trace;
  int k = 20;
  std::vector<int> t{3};
  std::vector<int> T{3};
  std::vector<int> hits_k{1, 5, 20};
  std::vector<int> mrr_k{10};
  bool no_context = false;
  bool no_explanation = false;
  bool no_verification = false;
  bool length_normalize = false;
  int max_tokens = 256;
  int jobs = 1;
  std::uint64_t seed = 0;
  bool timing = false;
};

struct StatsFlags {
  std::string trace;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path);
  out << content;
  if (!out.flush()) throw Error(Errc::kIo, "write failed for " + path);
}

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string format_fraction(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ec == std::errc() ? end : buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

PromptRegistry load_prompts(const std::string& path) {
  return path.empty() ? PromptRegistry{} : PromptRegistry::load(path);
}

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model,
                  "Retrieval model: a scripted-model JSON file, 'ngram' or 'remote'")
      ->capture_default_str();
  cmd->add_option("--reasoner", f.reasoner,
                  "Reasoning model (same syntax as --model); defaults to the retrieval model");
  cmd->add_option("--corpus", f.corpus, "Corpus JSONL used to train the n-gram model");
  cmd->add_option("--train-queries", f.train_queries,
                  "Query JSONL whose relevant pairs also train the n-gram model");
  cmd->add_option("--train-mode", f.train_mode, "N-gram training prompts: standard or instruction")
      ->check(CLI::IsMember({"standard", "instruction"}))
      ->capture_default_str();
  cmd->add_option("--ngram-order", f.ngram_order, "N-gram order")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  cmd->add_option("--remote", f.remote,
                  std::string("Remote model endpoint (overridden by ") + kRemoteEnv + ")");
  cmd->add_option("--remote-timeout-ms", f.remote_timeout_ms, "Remote request timeout")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--remote-retries", f.remote_retries, "Remote retries per request")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

class Models {
 public:
  Models(const ModelFlags& flags, const std::shared_ptr<const DocIdIndex>& index,
         const PromptRegistry& prompts)
      : flags_(flags), index_(index), prompts_(prompts) {
    retriever_ = make(flags.model);
    reasoner_ = flags.reasoner.empty() || flags.reasoner == flags.model
                    ? retriever_
                    : make(flags.reasoner);
  }

  const LanguageModel& retriever() const { return *retriever_; }
  const LanguageModel& reasoner() const { return *reasoner_; }

 private:
  std::shared_ptr<LanguageModel> make(const std::string& spec) {
    if (spec == "ngram") {
      if (flags_.corpus.empty()) throw Error(Errc::kConfig, "--model ngram needs --corpus");
      auto model = std::make_shared<NgramModel>(index_->vocab_ptr(), flags_.ngram_order);
      const Corpus corpus = load_corpus(flags_.corpus);
      std::vector<QueryDocPair> pairs;
      if (!flags_.train_queries.empty()) pairs = query_doc_pairs(load_queries(flags_.train_queries));
      train_ngram(*model, corpus, pairs, *index_,
                  flags_.train_mode == "standard" ? NllMode::kStandard : NllMode::kInstruction,
                  prompts_);
      return model;
    }
    if (spec == "remote") {
      RemoteOptions options;
      const char* env = std::getenv(kRemoteEnv);
      options.url = env != nullptr && *env != '\0' ? std::string(env) : flags_.remote;
      if (options.url.empty()) {
        throw Error(Errc::kConfig, std::string("--model remote needs --remote or ") + kRemoteEnv);
      }
      options.timeout_ms = flags_.remote_timeout_ms;
      options.retries = flags_.remote_retries;
      return std::make_shared<RemoteModel>(options, index_->vocab_ptr());
    }
    return std::make_shared<ScriptedModel>(ScriptedModel::load(spec, index_->vocab_ptr()));
  }

  const ModelFlags& flags_;
  std::shared_ptr<const DocIdIndex> index_;
  const PromptRegistry& prompts_;
  std::shared_ptr<LanguageModel> retriever_;
  std::shared_ptr<LanguageModel> reasoner_;
};

std::shared_ptr<const DocIdIndex> open_index(const std::string& path) {
  return std::make_shared<const DocIdIndex>(load_index(path));
}

int build_index(const BuildFlags& f, std::ostream& out) {
  const Corpus corpus = load_corpus(f.corpus);
  IndexBuildConfig config;
  config.dim = f.dim;
  config.seed = f.seed;
  config.rq.levels = f.levels;
  config.rq.branching = f.branching;
  config.views.ngram_count = f.ngram_count;
  config.views.ngram_order = f.ngram_order;
  for (const auto& v : f.views) {
    switch (parse_view(v)) {
      case DocIdView::kPath: break;
      case DocIdView::kTitle: config.views.title = true; break;
      case DocIdView::kNgram: config.views.ngram = true; break;
      case DocIdView::kPseudoQuery: config.views.pseudo_query = true; break;
    }
  }
  std::vector<std::string> seeds = load_prompts(f.prompts).all();
  if (!f.queries.empty()) {
    for (const auto& q : load_queries(f.queries)) seeds.push_back(q.text);
  }
  const DocIdIndex index = build_docid_index(corpus, config, seeds);
  save_index(index, f.out);
  out << "wrote " << index.size() << " identifiers for " << index.doc_keys().size()
      << " documents to " << f.out << "\n";
  return 0;
}

int retrieve_cmd(const RetrieveFlags& f, const ModelFlags& mf, std::ostream& out) {
  if (f.query.empty() == f.queries.empty()) {
    throw Error(Errc::kConfig, "give exactly one of --query and --queries");
  }
  const auto index = open_index(f.index);
  const PromptRegistry prompts = load_prompts(f.prompts);
  const auto automaton = build_automaton(parse_strategy(f.strategy), index);
  const Models models(mf, index, prompts);
  BeamConfig beam;
  beam.beam_width = f.k;
  beam.length_normalize = f.length_normalize;
  const Retriever retriever{models.retriever(), *automaton, prompts, beam};

  if (!f.query.empty()) {
    Query q;
    q.query_id = "q";
    q.text = f.query;
    for (const auto& c : run_standard(q, retriever)) {
      out << c.surface << '\t' << format_score(c.score) << '\t' << c.doc_key << '\n';
    }
    return 0;
  }
  for (const Query& q : load_queries(f.queries)) {
    for (const auto& c : run_standard(q, retriever)) {
      out << q.query_id << '\t' << c.surface << '\t' << format_score(c.score) << '\t' << c.doc_key
          << '\n';
    }
  }
  return 0;
}

int run_cmd(const RunFlags& f, const ModelFlags& mf, std::ostream& out) {
  const auto index = open_index(f.index);
  const PromptRegistry prompts = load_prompts(f.prompts);
  const auto automaton = build_automaton(parse_strategy(f.strategy), index);
  const std::vector<Query> queries = load_queries(f.queries);
  const Models models(mf, index, prompts);

  ExperimentConfig config;
  config.pipeline = parse_pipeline(f.pipeline);
  config.beam.beam_width = f.k;
  config.beam.length_normalize = f.length_normalize;
  config.verify_depths = f.t;
  config.round_budgets = f.T;
  config.ablation = {f.no_context, f.no_explanation, f.no_verification};
  config.max_tokens = f.max_tokens;
  config.jobs = f.jobs;
  config.timing = f.timing;
  config.seed = f.seed;
  config.hits_ks = f.hits_k;
  config.mrr_ks = f.mrr_k;

  const ExperimentResult result =
      run_experiment(config, *automaton, queries, models.retriever(), models.reasoner(), prompts);
  write_file(f.report, result.report_json);
  if (!f.trace.empty()) write_file(f.trace, result.trace_jsonl);

  for (const auto& row : result.rows) {
    if (config.pipeline == Pipeline::kR4R) {
      out << "t=" << row.verify_depth << " T=" << row.round_budget << ' ';
    }
    out << "n=" << row.metrics.n_queries;
    for (const auto& [k, v] : row.metrics.hits) out << " hits@" << k << '=' << format_fraction(v);
    for (const auto& [k, v] : row.metrics.mrr) out << " mrr@" << k << '=' << format_fraction(v);
    if (row.termination) {
      out << " termination=" << format_fraction(row.termination->all_relevant) << '/'
          << format_fraction(row.termination->budget_exhausted) << '/'
          << format_fraction(row.termination->parse_failure);
    }
    out << '\n';
  }
  return 0;
}

int stats_cmd(const StatsFlags& f, std::ostream& out) {
  const TerminationStats stats = termination_stats_from_trace(read_file(f.trace));
  out << format_fraction(stats.all_relevant) << '/' << format_fraction(stats.budget_exhausted)
      << '/' << format_fraction(stats.parse_failure) << '\n';
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative retrieval with reasoning-guided refinement", "gentrieval"};
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every subcommand and flag");
  app.require_subcommand(1);

  BuildFlags build;
  auto* build_cmd = app.add_subcommand("build-index", "Build a docid index from a corpus");
  build_cmd->add_option("--corpus", build.corpus, "Corpus JSONL")->required();
  build_cmd->add_option("--out", build.out, "Output index file")->required();
  build_cmd->add_option("--levels", build.levels, "RQ levels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  build_cmd->add_option("--branching", build.branching, "Clusters per node")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  build_cmd->add_option("--dim", build.dim, "Embedding dimension")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  build_cmd->add_option("--seed", build.seed, "Embedding hash seed")->capture_default_str();
  build_cmd->add_option("--views", build.views, "Extra views: title, ngram, pseudo_query")
      ->delimiter(',');
  build_cmd->add_option("--ngram-count", build.ngram_count, "N-grams per document (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  build_cmd->add_option("--ngram-order", build.ngram_order, "N-gram view order (n)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  build_cmd->add_option("--prompts", build.prompts, "Prompt JSON whose texts seed the vocabulary");
  build_cmd->add_option("--queries", build.queries, "Query JSONL whose texts seed the vocabulary");

  RetrieveFlags retrieve;
  ModelFlags retrieve_models;
  auto* retrieve_sub = app.add_subcommand("retrieve", "Rank identifiers for one query or a file");
  retrieve_sub->add_option("--index", retrieve.index, "Index file")->required();
  retrieve_sub->add_option("--strategy", retrieve.strategy, "trie, fm or termset")
      ->capture_default_str();
  retrieve_sub->add_option("--query", retrieve.query, "Query text");
  retrieve_sub->add_option("--queries", retrieve.queries, "Query JSONL");
  retrieve_sub->add_option("--k", retrieve.k, "Beam width and list length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  retrieve_sub->add_flag("--length-normalize", retrieve.length_normalize,
                         "Rank finished beams by per-token log-prob");
  retrieve_sub->add_option("--prompts", retrieve.prompts, "Prompt JSON overriding defaults");
  add_model_flags(retrieve_sub, retrieve_models);

  RunFlags run;
  ModelFlags run_models;
  auto* run_sub = app.add_subcommand("run", "Run a pipeline over a query file and write a report");
  run_sub->add_option("--index", run.index, "Index file")->required();
  run_sub->add_option("--queries", run.queries, "Query JSONL")->required();
  run_sub->add_option("--report", run.report, "Report JSON output")->required();
  run_sub->add_option("--trace", run.trace, "Trace JSONL output");
  run_sub->add_option("--strategy", run.strategy, "trie, fm or termset")->capture_default_str();
  run_sub->add_option("--pipeline", run.pipeline, "standard, direct_cot or r4r")
      ->capture_default_str();
  run_sub->add_option("--k", run.k, "Beam width and list length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_sub->add_option("--t,--verify-depth", run.t, "Verify depth(s), comma separated")
      ->delimiter(',')
      ->capture_default_str();
  run_sub->add_option("--T,--round-budget", run.T, "Round budget(s), comma separated")
      ->delimiter(',')
      ->capture_default_str();
  run_sub->add_option("--hits-k", run.hits_k, "Cutoffs for Hits@k")
      ->delimiter(',')
      ->capture_default_str();
  run_sub->add_option("--mrr-k", run.mrr_k, "Cutoffs for MRR@k")
      ->delimiter(',')
      ->capture_default_str();
  run_sub->add_flag("--no-context", run.no_context, "Ablation: retrieve with the explanation");
  run_sub->add_flag("--no-explanation", run.no_explanation, "Ablation: drop the explanation");
  run_sub->add_flag("--no-verification", run.no_verification,
                    "Ablation: reflect on the top candidate every round");
  run_sub->add_flag("--length-normalize", run.length_normalize,
                    "Rank finished beams by per-token log-prob");
  run_sub->add_option("--max-tokens", run.max_tokens, "Generation budget for reasoning steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_sub->add_option("--jobs", run.jobs, "Queries evaluated in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_sub->add_option("--seed", run.seed, "Seed recorded with the report")->capture_default_str();
  run_sub->add_flag("--timing", run.timing,
                    "Record wall-clock latencies in the report and trace (not byte-stable)");
  run_sub->add_option("--prompts", run.prompts, "Prompt JSON overriding defaults");
  add_model_flags(run_sub, run_models);

  StatsFlags stats;
  auto* stats_sub = app.add_subcommand("stats", "Termination fractions of a trace file");
  stats_sub->add_option("--trace", stats.trace, "Trace JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help("", CLI::AppFormatMode::All);
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (build_cmd->parsed()) return build_index(build, out);
    if (retrieve_sub->parsed()) return retrieve_cmd(retrieve, retrieve_models, out);
    if (run_sub->parsed()) return run_cmd(run, run_models, out);
    if (stats_sub->parsed()) return stats_cmd(stats, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gentrieval::cli
