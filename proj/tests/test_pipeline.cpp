#include <gtest/gtest.h>

#include <fstream>
#include <mutex>

#include "simgrag/pipeline.hpp"
#include "toy.hpp"

namespace simgrag {
namespace {

using test::Toy;

EvalRecord record(std::string prediction, std::vector<std::string> gold) {
  EvalRecord r;
  r.prediction = std::move(prediction);
  r.gold = std::move(gold);
  return r;
}

std::string dump_all(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r, false).dump() + "\n";
  return out;
}

class CountingClient final : public ChatClient {
 public:
  explicit CountingClient(ChatClient& inner) : inner_(inner) {}
  std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) override {
    std::lock_guard lock(mu_);
    ++calls;
    return inner_.complete(messages, options);
  }
  std::size_t calls = 0;

 private:
  ChatClient& inner_;
  std::mutex mu_;
};

class JunkClient final : public ChatClient {
 public:
  std::string complete(const std::vector<ChatMessage>&, const ChatOptions&) override {
    ++calls;
    return "no structure here";
  }
  std::size_t calls = 0;
};

TEST(Metrics, AllCorrect) {
  const std::vector<EvalRecord> qa = {record("the answer is Satoshi Kon", {"Satoshi Kon"}),
                                      record("2006", {"2006", "two thousand six"})};
  EXPECT_EQ(evaluate_hits_at_1(qa), 1.0);
  const std::vector<EvalRecord> fv = {record("Supported", {"Supported"}), record("Refuted", {"Refuted"})};
  EXPECT_EQ(evaluate_accuracy(fv), 1.0);
}

TEST(Metrics, SevenOfTen) {
  std::vector<EvalRecord> records;
  for (int i = 0; i < 7; ++i) records.push_back(record("answer " + std::to_string(i), {std::to_string(i)}));
  for (int i = 0; i < 3; ++i) records.push_back(record("no idea", {"Paprika"}));
  EXPECT_DOUBLE_EQ(evaluate_hits_at_1(records), 0.7);
}

TEST(Metrics, UnknownVerdictIsIncorrect) {
  const std::vector<EvalRecord> fv = {record("Supported", {"Supported"}), record("Unknown", {"Refuted"}),
                                      record("Unknown", {"Unknown"}), record("Refuted", {"Supported"})};
  EXPECT_DOUBLE_EQ(evaluate_accuracy(fv), 0.25);
}

TEST(Metrics, EmptySetIsError) {
  EXPECT_THROW(evaluate_hits_at_1({}), std::invalid_argument);
  EXPECT_THROW(evaluate_accuracy({}), std::invalid_argument);
}

TEST(Metrics, FlagIsRecomputed) {
  auto r = record("wrong", {"right"});
  r.correct = true;
  EXPECT_EQ(evaluate_hits_at_1({r}), 0.0);
}

TEST(LoadQueries, IdsAndGold) {
  test::TempDir dir;
  {
    std::ofstream f(dir.file("q.jsonl"));
    f << R"({"id": "a", "query": "q1", "answers": ["x", "y"]})" << "\n\n"
      << R"({"query": "q2", "label": "Refuted"})" << "\n"
      << R"({"id": 7, "query": "q3"})" << "\n";
  }
  const auto qs = load_queries(dir.file("q.jsonl"));
  ASSERT_EQ(qs.size(), 3u);
  EXPECT_EQ(qs[0].id, "a");
  EXPECT_EQ(qs[0].gold, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(qs[1].id, "3");
  EXPECT_EQ(qs[1].gold, std::vector<std::string>{"Refuted"});
  EXPECT_EQ(qs[2].id, "7");
  EXPECT_TRUE(qs[2].gold.empty());
}

TEST(LoadQueries, MalformedLine) {
  test::TempDir dir;
  std::ofstream(dir.file("bad.jsonl")) << R"({"id": "a"})" << "\n";
  EXPECT_THROW(load_queries(dir.file("bad.jsonl")), std::runtime_error);
  EXPECT_THROW(load_queries(dir.file("missing.jsonl")), std::runtime_error);
}

TEST(Retriever, ValidatesIndexes) {
  const Toy toy;
  const HashEmbeddingProvider other(16);
  auto nodes = build_index(toy.graph.entities().labels(), other);
  auto rels = build_index(toy.graph.relations().labels(), other);
  EXPECT_THROW(Retriever(toy.graph, nodes, rels, std::nullopt, toy.provider), std::invalid_argument);
  EXPECT_THROW(Retriever(toy.graph, rels, nodes, std::nullopt, other), std::invalid_argument);
}

TEST(ToyPipeline, QuestionAnsweringIsPerfectAndStable) {
  const Toy toy;
  const auto prompts = cli::load_prompts(test::data_dir(), "kgqa", -1);
  const auto queries = load_queries(Toy::path("queries.jsonl"));
  ASSERT_EQ(queries.size(), 12u);
  ScriptedChatClient client(Toy::path("fixtures.jsonl"));
  PipelineOptions options;
  const auto first = run_pipeline(queries, *toy.retriever, prompts.pattern, prompts.answer, client, options);
  EXPECT_EQ(evaluate_hits_at_1(first), 1.0);
  for (const auto& r : first) {
    EXPECT_TRUE(r.correct) << r.id << ": " << r.raw_answer;
    EXPECT_TRUE(r.error.empty()) << r.id;
    EXPECT_FALSE(r.subgraphs.empty()) << r.id;
  }

  options.workers = 4;
  const auto second = run_pipeline(queries, *toy.retriever, prompts.pattern, prompts.answer, client, options);
  EXPECT_EQ(dump_all(first), dump_all(second));
}

TEST(ToyPipeline, OneQueryNeedsARetry) {
  const Toy toy;
  const auto prompts = cli::load_prompts(test::data_dir(), "kgqa", -1);
  ScriptedChatClient client(Toy::path("fixtures.jsonl"));
  const auto records =
      run_pipeline(load_queries(Toy::path("queries.jsonl")), *toy.retriever, prompts.pattern, prompts.answer, client, {});
  std::size_t retried = 0;
  for (const auto& r : records) retried += r.pattern_retries;
  EXPECT_EQ(retried, 1u);
}

TEST(ToyPipeline, VerificationIsPerfect) {
  const Toy toy;
  const auto prompts = cli::load_prompts(test::data_dir(), "factkg", -1);
  ScriptedChatClient client(Toy::path("fixtures.jsonl"));
  PipelineOptions options;
  options.task = Task::kFactVerification;
  const auto records = run_pipeline(load_queries(Toy::path("claims.jsonl")), *toy.retriever, prompts.pattern,
                                    prompts.answer, client, options);
  EXPECT_EQ(evaluate_accuracy(records), 1.0);
  for (const auto& r : records) EXPECT_TRUE(r.prediction == "Supported" || r.prediction == "Refuted");
}

TEST(ToyPipeline, UnknownPromptAbortsTheRun) {
  const Toy toy;
  const auto prompts = cli::load_prompts(test::data_dir(), "kgqa", 3);  // fixtures were recorded with 12 shots
  ScriptedChatClient client(Toy::path("fixtures.jsonl"));
  EXPECT_THROW(run_pipeline(load_queries(Toy::path("queries.jsonl")), *toy.retriever, prompts.pattern,
                            prompts.answer, client, {}),
               ChatError);
}

TEST(ToyPipeline, PatternFailureIsRecordedPerQuery) {
  const Toy toy;
  const auto prompts = cli::load_prompts(test::data_dir(), "kgqa", 0);
  JunkClient junk;
  const std::vector<EvalQuery> qs = {{"x", "who?", {"nobody"}}};
  PipelineOptions options;
  options.pattern.max_retries = 1;
  const auto records = run_pipeline(qs, *toy.retriever, prompts.pattern, prompts.answer, junk, options);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(junk.calls, 2u);
  EXPECT_FALSE(records[0].error.empty());
  EXPECT_FALSE(records[0].correct);
  EXPECT_TRUE(records[0].pattern.empty());
}

TEST(ToyPipeline, TimingsAreNonnegativeAndOptional) {
  const Toy toy;
  const auto prompts = cli::load_prompts(test::data_dir(), "kgqa", -1);
  ScriptedChatClient client(Toy::path("fixtures.jsonl"));
  const auto q = load_queries(Toy::path("queries.jsonl")).at(2);
  const auto r = run_query(q, *toy.retriever, prompts.pattern, prompts.answer, client, {});
  for (const double t : {r.timings.pattern_ms, r.timings.vector_ms, r.timings.search_ms, r.timings.answer_ms}) {
    EXPECT_GE(t, 0.0);
  }
  EXPECT_LE(r.timings.pattern_ms + r.timings.vector_ms + r.timings.search_ms + r.timings.answer_ms,
            r.timings.total_ms + 1e-6);
  EXPECT_FALSE(to_json(r, false).contains("timings_ms"));
  EXPECT_TRUE(to_json(r, true).contains("timings_ms"));
}

TEST(ToyPipeline, ClientCallsArePatternThenAnswer) {
  const Toy toy;
  const auto prompts = cli::load_prompts(test::data_dir(), "kgqa", -1);
  ScriptedChatClient scripted(Toy::path("fixtures.jsonl"));
  CountingClient client(scripted);
  run_query(load_queries(Toy::path("queries.jsonl")).at(0), *toy.retriever, prompts.pattern, prompts.answer, client,
            {});
  EXPECT_EQ(client.calls, 2u);
}

TEST(ToyPipeline, ReRecordingReproducesFixtures) {
  const Toy toy;
  const auto recorded = cli::record_fixtures(*toy.retriever, {Toy::path("queries.jsonl"), Toy::path("claims.jsonl")},
                                             cli::load_prompts(test::data_dir(), "kgqa", -1),
                                             cli::load_prompts(test::data_dir(), "factkg", -1), PipelineOptions{});
  std::ifstream in(Toy::path("fixtures.jsonl"));
  std::map<std::string, std::string> checked_in;
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    checked_in[j.at("fingerprint").get<std::string>()] = j.at("response").get<std::string>();
  }
  EXPECT_EQ(recorded, checked_in);
}

TEST(Bench, SampleAgreesWithNaive) {
  const Toy toy;
  const auto p = parse_llm_pattern(R"(("Tokyo Godfathers", "directed by", "UNKNOWN director 1"),
                                      ("UNKNOWN movie 1", "directed by", "UNKNOWN director 1"))");
  const auto s = bench_pattern(*toy.retriever, p, {}, true, 2);
  EXPECT_TRUE(s.identical);
  EXPECT_GE(s.naive_ms, 0.0);
  EXPECT_LE(s.explored_optimized, s.explored_naive);
  EXPECT_EQ(s.results, 3u);
}

TEST(Stats, MedianAndMean) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_EQ(mean({1.0, 2.0, 6.0}), 3.0);
  EXPECT_EQ(median({}), 0.0);
}

}  // namespace
}  // namespace simgrag
