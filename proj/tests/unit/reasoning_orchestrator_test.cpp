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

#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "gentrieval/constraint.hpp"
#include "gentrieval/error.hpp"
#include "gentrieval/eval.hpp"
#include "gentrieval/orchestrator.hpp"
#include "gentrieval/reasoning.hpp"
#include "support.hpp"

namespace gentrieval {
namespace {

using namespace gentrieval::testing;

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::kIo;
}

Query make_query(std::string text, std::set<std::string> relevant = {}) {
  Query q;
  q.query_id = "q";
  q.text = std::move(text);
  q.relevant_keys = std::move(relevant);
  return q;
}

ScriptedModel script(const std::string& json) { return ScriptedModel::from_json(json, nullptr); }

// ---- prompts ----

TEST(Prompts, InstructionTextsAreVerbatim) {
  const PromptRegistry reg;
  EXPECT_EQ(reg.get(PromptKind::kRetrieval),
            "You are a retrieval assistant. \nGiven a query, output identifiers for potentially\n"
            "relevant document (each identifier is a hyphen-\nseparated set of key phrases for "
            "that document).");
  EXPECT_EQ(reg.get(PromptKind::kIndexing),
            "You are a retrieval assistant. \nGiven a document, output identifiers for \n"
            "potentially relevant document (each identifier is \na hyphen-separated set of key "
            "phrases for that \ndocument).");
  EXPECT_EQ(reg.get(PromptKind::kDirectCot),
            "You are a QA assistant. \nGiven a query, think step by step about the answer \n"
            "and which documents are likely to contain it.");
  EXPECT_EQ(prompt_key(PromptKind::kReflect), "P_f");
}

TEST(Prompts, RenderedTemplatesHaveNoPlaceholders) {
  const PromptRegistry reg;
  const Slot slots[] = {{"query", "q text"},
                        {"docid", "food-apple"},
                        {"context", "c text"},
                        {"explanation", "e text"},
                        {"document", "d text"}};
  for (const auto& tmpl : reg.all()) {
    const std::string out = render_template(tmpl, slots);
    EXPECT_EQ(out.find('{'), std::string::npos) << out;
  }
}

TEST(Prompts, UnboundSlotIsAConfigError) {
  const Slot slots[] = {{"query", "q"}};
  EXPECT_EQ(code_of([&] { render_template("Q: {query} D: {docid}", slots); }), Errc::kConfig);
  EXPECT_EQ(render_template("Q: {query}", slots), "Q: q");
}

TEST(Prompts, UnmentionedSlotIsAppended) {
  const Slot slots[] = {{"query", "apple"}};
  EXPECT_EQ(render_template("Plain instruction.", slots), "Plain instruction.\napple");
  EXPECT_EQ(retrieval_prompt(PromptRegistry{}, "q", "aux"),
            PromptRegistry{}.get(PromptKind::kRetrieval) + "\nq\naux");
  EXPECT_EQ(retrieval_prompt(PromptRegistry{}, "q"),
            PromptRegistry{}.get(PromptKind::kRetrieval) + "\nq");
}

TEST(Prompts, FileOverridesWithDefaults) {
  const PromptRegistry reg = PromptRegistry::from_json(R"({"P_v": "Judge {docid} for {query}"})");
  EXPECT_EQ(reg.get(PromptKind::kVerify), "Judge {docid} for {query}");
  EXPECT_EQ(reg.get(PromptKind::kRetrieval), PromptRegistry{}.get(PromptKind::kRetrieval));
  EXPECT_EQ(code_of([] { PromptRegistry::from_json("[1]"); }), Errc::kConfig);
  EXPECT_EQ(code_of([] { PromptRegistry::from_json(R"({"P_r": 3})"); }), Errc::kConfig);
}

// ---- structured output ----

TEST(Structured, BothBlocks) {
  const auto out = parse_structured(
      "Sure! <context> apple fruit </context>\n<explanation>because</explanation>");
  ASSERT_TRUE(out);
  EXPECT_EQ(out->context, "apple fruit");
  EXPECT_EQ(out->explanation, "because");
}

TEST(Structured, MissingExplanationFails) {
  EXPECT_FALSE(parse_structured("<context>apple</context>"));
  EXPECT_FALSE(parse_structured("<context>  </context><explanation>x</explanation>"));
  EXPECT_TRUE(parse_structured("<context>apple</context>", ParseMode::kContextOnly));
  EXPECT_FALSE(parse_structured("<context>a</context>", ParseMode::kExplanationOnly));
  EXPECT_TRUE(parse_structured("<explanation>e</explanation>", ParseMode::kExplanationOnly));
}

TEST(Structured, FirstWellFormedPairWins) {
  const auto out = parse_structured(
      "<context>stray <context>inner words</context> tail</context>"
      "<explanation>one</explanation><explanation>two</explanation>");
  ASSERT_TRUE(out);
  EXPECT_EQ(out->context, "inner words");
  EXPECT_EQ(out->explanation, "one");
  const auto upper = parse_structured("<CONTEXT>Apple</Context><Explanation>x</EXPLANATION>");
  ASSERT_TRUE(upper);
  EXPECT_EQ(upper->context, "Apple");
}

// ---- think / verify / reflect / direct ----

TEST(Think, ParsesTheBlocks) {
  const ScriptedModel model_inner = script(
      R"([{"response": "<context>apple fruit calories</context><explanation>fruit sense</explanation>"}])");
  const CountingModel model(model_inner);
  const ThinkResult r = think(model, make_query("apple calories"), PromptRegistry{});
  EXPECT_EQ(r.state.context, "apple fruit calories");
  EXPECT_EQ(r.state.explanation, "fruit sense");
  EXPECT_EQ(r.state.round, 0);
  EXPECT_FALSE(r.fell_back);
  EXPECT_EQ(model.generate_calls(), 1);
}

TEST(Think, GarbageTwiceFallsBackToTheQuery) {
  const ScriptedModel model_inner = script(R"([{"response": "no tags here"}])");
  const CountingModel model(model_inner);
  const ThinkResult r = think(model, make_query("apple calories"), PromptRegistry{});
  EXPECT_EQ(r.state.context, "apple calories");
  EXPECT_EQ(r.state.explanation, "");
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(model.generate_calls(), 2);
}

TEST(Think, RetryWithFormatReminder) {
  const ScriptedModel model_inner = script(
      R"([{"prompt_contains": "format reminder", "response": "<context>c</context><explanation>e</explanation>"},
          {"response": "garbage"}])");
  const CountingModel model(model_inner);
  const ThinkResult r = think(model, make_query("apple"), PromptRegistry{});
  EXPECT_EQ(r.state.context, "c");
  EXPECT_EQ(r.calls, 2);
  EXPECT_EQ(model.generate_calls(), 2);
}

TEST(Verify, ParseRule) {
  EXPECT_EQ(parse_verdict("IRRELEVANT: wrong product"), Verdict::kIrrelevant);
  EXPECT_EQ(parse_verdict("relevant"), Verdict::kRelevant);
  EXPECT_EQ(parse_verdict("Not relevant; irrelevant really"), Verdict::kIrrelevant);
  EXPECT_FALSE(parse_verdict("maybe"));

  const ScriptedModel maybe_inner = script(R"([{"response": "maybe"}])");
  const CountingModel maybe(maybe_inner);
  const auto j = verify(maybe, make_query("q"), "food-apple", PromptRegistry{});
  EXPECT_EQ(j.verdict, Verdict::kRelevant);
  EXPECT_TRUE(j.defaulted);
  EXPECT_EQ(maybe.generate_calls(), 2);

  const ScriptedModel no_inner = script(R"([{"response": "IRRELEVANT: wrong product"}])");
  const CountingModel no(no_inner);
  EXPECT_EQ(verify(no, make_query("q"), "x", PromptRegistry{}).verdict, Verdict::kIrrelevant);
  EXPECT_EQ(no.generate_calls(), 1);
}

TEST(Verify, PromptCarriesQueryAndSurface) {
  const ScriptedModel model = script(
      R"([{"prompt_contains": "query: apple calories candidate document identifier: tech-apple", "response": "irrelevant"},
          {"response": "relevant"}])");
  EXPECT_EQ(verify(model, make_query("apple calories"), "tech-apple", PromptRegistry{}).verdict,
            Verdict::kIrrelevant);
  EXPECT_EQ(verify(model, make_query("apple calories"), "food-apple", PromptRegistry{}).verdict,
            Verdict::kRelevant);
}

TEST(Reflect, EditsTheState) {
  const ScriptedModel model = script(
      R"([{"prompt_contains": "current context: apple company", "response": "<context>apple fruit</context><explanation>fruit</explanation>"}])");
  const ReasoningState state{0, "apple company", "tech"};
  const auto r = reflect(model, make_query("apple calories"), "tech-apple", state, PromptRegistry{});
  ASSERT_TRUE(r.state);
  EXPECT_EQ(r.state->context, "apple fruit");
  EXPECT_EQ(r.state->round, 1);
}

TEST(Reflect, GarbageTwiceSignalsFailure) {
  const ScriptedModel model_inner = script(R"([{"response": "nope"}])");
  const CountingModel model(model_inner);
  const auto r = reflect(model, make_query("q"), "x", ReasoningState{0, "c", "e"}, PromptRegistry{});
  EXPECT_FALSE(r.state);
  EXPECT_EQ(r.calls, 2);
}

TEST(Reflect, NoOpEditsAreAccepted) {
  const ScriptedModel model = script(
      R"([{"response": "<context>c</context><explanation>e</explanation>"}])");
  const auto r = reflect(model, make_query("q"), "x", ReasoningState{2, "c", "e"}, PromptRegistry{});
  ASSERT_TRUE(r.state);
  EXPECT_EQ(r.state->context, "c");
  EXPECT_EQ(r.state->round, 3);
}

TEST(Reflect, AblationModesKeepTheOtherField) {
  const ScriptedModel model = script(
      R"([{"response": "<context>new c</context><explanation>new e</explanation>"}])");
  ReasoningOptions context_only{ParseMode::kContextOnly};
  const auto a = reflect(model, make_query("q"), "x", {0, "c", "e"}, PromptRegistry{}, context_only);
  EXPECT_EQ(a.state->context, "new c");
  EXPECT_EQ(a.state->explanation, "e");
  ReasoningOptions expl_only{ParseMode::kExplanationOnly};
  const auto b = reflect(model, make_query("q"), "x", {0, "c", "e"}, PromptRegistry{}, expl_only);
  EXPECT_EQ(b.state->context, "c");
  EXPECT_EQ(b.state->explanation, "new e");
}

TEST(DirectCot, VerbatimEmptyAndBounded) {
  EXPECT_EQ(direct_cot(script(R"([{"response": "step one. step two."}])"), make_query("q"),
                       PromptRegistry{}),
            "step one. step two.");
  EXPECT_EQ(direct_cot(script(R"([{"response": ""}])"), make_query("q"), PromptRegistry{}), "");

  auto vocab = std::make_shared<Vocabulary>();
  tokenize(*vocab, "apple fruit tech company phone calories food");
  vocab->freeze();
  NgramModel ngram(vocab, 3);
  ngram.train(tokenize_lenient(*vocab, "apple"), tokenize_lenient(*vocab, "fruit food apple"));
  const std::string text = direct_cot(ngram, make_query("apple calories"), PromptRegistry{});
  EXPECT_LE(split_words(text).size(), 256u);
}

class DownModel final : public LanguageModel {
 public:
  std::string_view kind() const noexcept override { return "down"; }
  TokenDistribution next_token_distribution(const LmContext&) const override {
    throw Error(Errc::kNotSupported, "no");
  }
  std::string generate(const GenerationRequest&) const override {
    throw Error(Errc::kRemoteUnavailable, "connection refused");
  }
};

TEST(Reasoning, TransportErrorsBecomeModelFailure) {
  const DownModel down;
  const PromptRegistry reg;
  EXPECT_EQ(code_of([&] { think(down, make_query("q"), reg); }), Errc::kModelFailure);
  EXPECT_EQ(code_of([&] { verify(down, make_query("q"), "x", reg); }), Errc::kModelFailure);
  EXPECT_EQ(code_of([&] { reflect(down, make_query("q"), "x", {0, "c", "e"}, reg); }),
            Errc::kModelFailure);
  EXPECT_EQ(code_of([&] { direct_cot(down, make_query("q"), reg); }), Errc::kModelFailure);
}

// ---- orchestrator ----

std::vector<std::string> surfaces(const RankedList& list) {
  std::vector<std::string> out;
  for (const auto& c : list) out.push_back(c.surface);
  return out;
}

struct Toy {
  std::shared_ptr<const DocIdIndex> index = toy_index();
  std::unique_ptr<ConstraintAutomaton> trie = build_automaton(Strategy::kTrie, index);
  PromptRegistry prompts;
  ScriptedModel model = ScriptedModel::from_json(toy_script_json(), index->vocab_ptr());
  Retriever retriever() const { return {model, *trie, prompts, BeamConfig{3}}; }
};

TEST(Standard, ToyRanking) {
  const Toy toy;
  const auto ranked = run_standard(make_query("apple calories"), toy.retriever());
  EXPECT_EQ(surfaces(ranked), (std::vector<std::string>{"food-apple", "tech-apple", "food-banana"}));
  Retriever top1 = toy.retriever();
  top1.beam.beam_width = 1;
  EXPECT_EQ(surfaces(run_standard(make_query("apple calories"), top1)),
            (std::vector<std::string>{"food-apple"}));
  EXPECT_EQ(code_of([&] { run_standard(make_query("  \t "), toy.retriever()); }),
            Errc::kEmptyQuery);
}

TEST(DirectCotPipeline, EmptyReasoningMatchesStandard) {
  const Toy toy;
  const ScriptedModel silent = script(R"([{"response": ""}])");
  const auto result = run_direct_cot(make_query("apple calories"), silent, toy.retriever());
  EXPECT_EQ(result.reasoning, "");
  EXPECT_EQ(surfaces(result.ranked), surfaces(run_standard(make_query("apple calories"), toy.retriever())));
}

TEST(DirectCotPipeline, ReasoningShiftsTheRanking) {
  const auto index = toy_index();
  const auto trie = build_automaton(Strategy::kTrie, index);
  const PromptRegistry prompts;
  const ScriptedModel retriever_model = ScriptedModel::from_json(
      R"([{"prompt_contains": "eating fruit", "generated": "", "distribution": {"food": 0.9, "tech": 0.1}},
          {"generated": "", "distribution": {"food": 0.7, "tech": 0.3}},
          {"generated": "food", "distribution": {"apple": 0.6, "banana": 0.4}},
          {"generated": "tech", "distribution": {"apple": 1.0}},
          {"distribution": {"<end>": 1.0}}])",
      index->vocab_ptr());
  const ScriptedModel reasoner = script(R"([{"response": "they mean eating fruit"}])");
  const Retriever retriever{retriever_model, *trie, prompts, BeamConfig{3}};
  // Without reasoning: tech-apple .30 > food-banana .28. With it: food-banana .36 > tech-apple .10.
  EXPECT_EQ(surfaces(run_standard(make_query("apple"), retriever))[1], "tech-apple");
  const auto shifted = run_direct_cot(make_query("apple"), reasoner, retriever);
  EXPECT_EQ(surfaces(shifted.ranked),
            (std::vector<std::string>{"food-apple", "food-banana", "tech-apple"}));
  EXPECT_NEAR(shifted.ranked[1].score, std::log(0.36), 1e-12);
  EXPECT_EQ(code_of([&] { run_direct_cot(make_query("apple"), DownModel{}, retriever); }),
            Errc::kModelFailure);
}

constexpr const char* kRetrievalRules = R"(
  {"prompt_contains": "apple company", "generated": "", "distribution": {"tech": 0.8, "food": 0.2}},
  {"prompt_contains": "apple company", "generated": "food", "distribution": {"apple": 0.5, "banana": 0.5}},
  {"prompt_contains": "apple fruit", "generated": "", "distribution": {"food": 0.9, "tech": 0.1}},
  {"prompt_contains": "apple fruit", "generated": "food", "distribution": {"apple": 0.7, "banana": 0.3}},
  {"generated": "tech", "distribution": {"apple": 1.0}},
  {"distribution": {"<end>": 1.0}})";

std::string rules(const std::string& reasoning_rules) {
  return "[" + reasoning_rules + "," + kRetrievalRules + "]";
}

constexpr const char* kThink =
    R"({"prompt_contains": "think about what the query is after", "response": "<context>apple company</context><explanation>brand</explanation>"})";
constexpr const char* kGoodReflect =
    R"({"prompt_contains": "reflect on a retrieval mistake", "response": "<context>apple fruit</context><explanation>fruit</explanation>"})";
constexpr const char* kTechIrrelevant =
    R"({"prompt_contains": "identifier: tech-apple", "response": "irrelevant"}, {"prompt_contains": "relevance judge", "response": "relevant"})";

struct R4RFixture {
  explicit R4RFixture(const std::string& json)
      : model(ScriptedModel::from_json(json, toy.index->vocab_ptr())), counting(model) {}
  Toy toy;
  ScriptedModel model;
  CountingModel counting;
  R4RResult run(RefineConfig config) {
    const Retriever r{counting, *toy.trie, toy.prompts, BeamConfig{3}};
    return run_r4r(make_query("apple calories", {"d1"}), counting, r, config);
  }
};

TEST(R4R, WalkthroughEndsAllRelevantInRoundTwo) {
  R4RFixture f(rules(std::string(kThink) + "," + kGoodReflect + "," + kTechIrrelevant));
  RefineConfig config;
  config.verify_depth = 2;
  const R4RResult r = f.run(config);
  EXPECT_EQ(r.reason, TerminationReason::kAllRelevant);
  EXPECT_EQ(r.rounds_used, 2);
  EXPECT_EQ(r.ranked[0].surface, "food-apple");
  ASSERT_EQ(r.rounds.size(), 2u);
  EXPECT_EQ(r.rounds[0].context, "apple company");
  EXPECT_EQ(r.rounds[0].j_hat, 1);
  EXPECT_EQ(r.rounds[1].context, "apple fruit");
  EXPECT_EQ(r.rounds[1].j_hat, 0);
  EXPECT_EQ(r.rounds[1].judgments.size(), 2u);
  EXPECT_TRUE(r.shared_model);
  EXPECT_EQ(f.counting.generate_calls(), 5);
}

TEST(R4R, ParseFailureReturnsTheCurrentRound) {
  R4RFixture f(rules(std::string(kThink) +
                     R"(, {"prompt_contains": "reflect on a retrieval mistake", "response": "??"},)" +
                     kTechIrrelevant));
  const R4RResult r = f.run(RefineConfig{});
  EXPECT_EQ(r.reason, TerminationReason::kParseFailure);
  EXPECT_EQ(r.rounds_used, 1);
  EXPECT_EQ(surfaces(r.ranked), surfaces(r.rounds[0].topk));
  EXPECT_EQ(r.ranked[0].surface, "tech-apple");
}

TEST(R4R, BudgetExhaustedReturnsTheLastRound) {
  R4RFixture f(rules(std::string(kThink) + "," + kGoodReflect +
                     R"(, {"prompt_contains": "relevance judge", "response": "irrelevant"})"));
  RefineConfig config;
  config.round_budget = 3;
  const R4RResult r = f.run(config);
  EXPECT_EQ(r.reason, TerminationReason::kBudgetExhausted);
  EXPECT_EQ(r.rounds_used, 3);
  EXPECT_EQ(surfaces(r.ranked), surfaces(r.rounds[2].topk));
  for (const auto& round : r.rounds) EXPECT_EQ(round.judgments.size(), 1u);
}

TEST(R4R, NoVerificationReflectsOnRankOneEveryRound) {
  R4RFixture f(rules(std::string(kThink) + "," + kGoodReflect));
  RefineConfig config;
  config.round_budget = 3;
  config.ablation.no_verification = true;
  const R4RResult r = f.run(config);
  EXPECT_EQ(r.reason, TerminationReason::kBudgetExhausted);
  EXPECT_EQ(r.rounds_used, 3);
  for (const auto& round : r.rounds) {
    EXPECT_TRUE(round.judgments.empty());
    EXPECT_EQ(round.j_hat, 1);
  }
  // think + one reflection per round.
  EXPECT_EQ(f.counting.generate_calls(), 4);
}

TEST(R4R, NoContextRetrievesWithTheExplanation) {
  R4RFixture f(rules(
      R"({"prompt_contains": "think about what the query is after", "response": "<context>ignored</context><explanation>apple company</explanation>"},
         {"prompt_contains": "reflect on a retrieval mistake", "response": "<explanation>apple fruit</explanation>"},)" +
      std::string(kTechIrrelevant)));
  RefineConfig config;
  config.verify_depth = 1;
  config.ablation.no_context = true;
  const R4RResult r = f.run(config);
  EXPECT_EQ(r.reason, TerminationReason::kAllRelevant);
  EXPECT_EQ(r.rounds[0].topk[0].surface, "tech-apple");
  EXPECT_EQ(r.rounds[1].explanation, "apple fruit");
  EXPECT_EQ(r.ranked[0].surface, "food-apple");
}

TEST(R4R, NoExplanationNeedsOnlyTheContext) {
  R4RFixture f(rules(
      R"({"prompt_contains": "think about what the query is after", "response": "<context>apple company</context>"},
         {"prompt_contains": "reflect on a retrieval mistake", "response": "<context>apple fruit</context>"},)" +
      std::string(kTechIrrelevant)));
  RefineConfig config;
  config.verify_depth = 1;
  config.ablation.no_explanation = true;
  const R4RResult r = f.run(config);
  EXPECT_FALSE(r.think_fallback);
  EXPECT_EQ(r.reason, TerminationReason::kAllRelevant);
  EXPECT_EQ(r.rounds[1].explanation, "");
}

TEST(R4R, ConfigErrors) {
  R4RFixture f(rules(kThink));
  RefineConfig bad_t;
  bad_t.verify_depth = 4;  // beam width is 3
  EXPECT_EQ(code_of([&] { f.run(bad_t); }), Errc::kConfig);
  RefineConfig bad_T;
  bad_T.round_budget = 0;
  EXPECT_EQ(code_of([&] { f.run(bad_T); }), Errc::kConfig);
  RefineConfig both;
  both.ablation.no_context = true;
  both.ablation.no_explanation = true;
  EXPECT_EQ(code_of([&] { f.run(both); }), Errc::kConfig);
}

TEST(R4R, CallBudgetAndShortCircuitOnRandomScripts) {
  const std::string verdicts[] = {"relevant", "irrelevant", "maybe"};
  const std::string reflections[] = {"<context>apple fruit</context><explanation>e</explanation>",
                                     "garbage", "<context>apple company</context><explanation>e</explanation>"};
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const std::string json = rules(
        std::string(kThink) + R"(, {"prompt_contains": "format reminder", "response": ")" +
        (rng() % 2 ? std::string("irrelevant") : std::string("<context>apple fruit</context><explanation>e</explanation>")) +
        R"("}, {"prompt_contains": "reflect on a retrieval mistake", "response": ")" +
        reflections[rng() % 3] + R"("}, {"prompt_contains": "relevance judge", "response": ")" +
        verdicts[rng() % 3] + "\"}");
    R4RFixture f(json);
    RefineConfig config;
    config.verify_depth = 1 + static_cast<int>(rng() % 3);
    config.round_budget = 1 + static_cast<int>(rng() % 4);
    const R4RResult r = f.run(config);
    const int t = config.verify_depth;
    const int T = config.round_budget;
    EXPECT_LE(f.counting.generate_calls(), 2 + T * (1 + 2 * t + 2));
    EXPECT_LE(r.rounds_used, T);
    EXPECT_EQ(static_cast<int>(r.rounds.size()), r.rounds_used);
    EXPECT_EQ(surfaces(r.ranked), surfaces(r.rounds.back().topk));
    int calls = r.think_calls;
    for (const auto& round : r.rounds) {
      const int expected = round.j_hat > 0 ? round.j_hat : t;
      EXPECT_EQ(static_cast<int>(round.judgments.size()), expected);
      calls += round.generate_calls;
    }
    EXPECT_EQ(calls, f.counting.generate_calls());
  }
}

TEST(R4R, OracleVerificationDoesNoHarmAtDepthOne) {
  // The retriever is an n-gram model; the reasoner judges by ground truth and
  // proposes a context of words from the relevant document.
  const std::string corpus_text =
      "{\"id\": \"d1\", \"text\": \"apple orchard fruit harvest\"}\n"
      "{\"id\": \"d2\", \"text\": \"apple phone company launch\"}\n"
      "{\"id\": \"d3\", \"text\": \"banana fruit harvest season\"}\n"
      "{\"id\": \"d4\", \"text\": \"phone launch event season\"}\n";
  const Corpus corpus = parse_corpus(corpus_text);
  const PromptRegistry prompts;
  std::vector<std::string> seeds = prompts.all();
  IndexBuildConfig config;
  config.rq.levels = 1;
  config.rq.branching = 2;
  const auto index = std::make_shared<const DocIdIndex>(build_docid_index(corpus, config, seeds));
  const auto trie = build_automaton(Strategy::kTrie, index);
  NgramModel retriever_model(index->vocab_ptr(), 3);
  train_ngram(retriever_model, corpus, {}, *index, NllMode::kInstruction, prompts);

  class Oracle final : public LanguageModel {
   public:
    Oracle(const DocIdIndex& index, const Corpus& corpus, std::string gold)
        : index_(index), corpus_(corpus), gold_(std::move(gold)) {}
    std::string_view kind() const noexcept override { return "oracle"; }
    TokenDistribution next_token_distribution(const LmContext&) const override {
      throw Error(Errc::kNotSupported, "oracle");
    }
    std::string generate(const GenerationRequest& req) const override {
      const auto marker = req.prompt.find("Candidate document identifier: ");
      if (marker != std::string::npos) {
        const auto begin = marker + 31;
        const std::string surface = req.prompt.substr(begin, req.prompt.find('\n', begin) - begin);
        for (std::size_t r : index_.records_with_surface(surface)) {
          if (index_.record(r).doc_key == gold_) return "relevant";
        }
        return "irrelevant";
      }
      const auto q = req.prompt.find("Query: ");
      if (req.prompt.find("Reflect") != std::string::npos) {
        return "<context>" + corpus_.at(gold_).text + "</context><explanation>x</explanation>";
      }
      const auto end = req.prompt.find('\n', q + 7);
      return "<context>" + req.prompt.substr(q + 7, end - q - 7) + "</context><explanation>x</explanation>";
    }

   private:
    const DocIdIndex& index_;
    const Corpus& corpus_;
    std::string gold_;
  };

  const std::vector<std::pair<std::string, std::string>> queries = {
      {"apple harvest", "d1"}, {"apple launch", "d2"}, {"fruit season", "d3"},
      {"launch season", "d4"}, {"apple fruit", "d2"},  {"phone season", "d1"}};
  int standard_hits = 0;
  int r4r_hits = 0;
  for (const auto& [text, gold] : queries) {
    const Oracle oracle(*index, corpus, gold);
    const Retriever retriever{retriever_model, *trie, prompts, BeamConfig{4}};
    const Query q = make_query(text, {gold});
    standard_hits += run_standard(q, retriever)[0].doc_key == gold ? 1 : 0;
    RefineConfig refine;
    refine.verify_depth = 1;
    const R4RResult r = run_r4r(q, oracle, retriever, refine);
    r4r_hits += r.ranked[0].doc_key == gold ? 1 : 0;
  }
  EXPECT_GE(r4r_hits, standard_hits);
}

TEST(Trace, JsonFields) {
  R4RFixture f(rules(std::string(kThink) + "," + kGoodReflect + "," + kTechIrrelevant));
  RefineConfig config;
  config.verify_depth = 2;
  const R4RResult r = f.run(config);
  const auto j = nlohmann::json::parse(trace_json(r, true));
  EXPECT_EQ(j["qid"], "q");
  EXPECT_EQ(j["reason"], "all_relevant");
  EXPECT_EQ(j["rounds"], 2);
  ASSERT_EQ(j["rounds_detail"].size(), 2u);
  const auto& first = j["rounds_detail"][0];
  EXPECT_EQ(first["c"], "apple company");
  EXPECT_EQ(first["topk"][0]["surface"], "tech-apple");
  EXPECT_EQ(first["topk"][0]["doc"], "d2");
  EXPECT_EQ(first["judgments"], nlohmann::json::array({"irrelevant"}));
  EXPECT_EQ(first["j_hat"], 1);
  EXPECT_GE(first["ms"].get<double>(), 0.0);
  EXPECT_LE(j["rounds_detail"].size(), 3u);
  const auto untimed = nlohmann::json::parse(trace_json(r, false));
  EXPECT_FALSE(untimed["rounds_detail"][0].contains("ms"));
  EXPECT_EQ(trace_json(r, false).find('\n'), std::string::npos);
}

}  // namespace
}  // namespace gentrieval
