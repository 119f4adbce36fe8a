#pragma once
// End-to-end query pipeline and evaluation records: pattern generation,
// candidate vector search, subgraph search, answer generation, metrics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "simgrag/embedding.hpp"
#include "simgrag/kg_store.hpp"
#include "simgrag/llm.hpp"
#include "simgrag/pattern.hpp"
#include "simgrag/retrieval.hpp"

namespace simgrag {

struct TimedRetrieval {
  RetrievalResult result;
  double vector_ms = 0.0;  // pattern embedding + candidate search
  double search_ms = 0.0;  // subgraph enumeration only
};

// Owns the indexes for one graph. The provider and normalizer must match the
// ones the indexes were built with.
class Retriever {
 public:
  Retriever(const KnowledgeGraph& g, VectorIndex nodes, VectorIndex relations, std::optional<VectorIndex> types,
            const EmbeddingProvider& provider, LabelNormalizer normalizer = {});

  const KnowledgeGraph& graph() const { return g_; }
  const VectorIndex& node_index() const { return nodes_; }
  const VectorIndex& relation_index() const { return relations_; }

  PatternVectors embed(const PatternGraph& p) const;
  TimedRetrieval retrieve(const PatternGraph& p, const RetrievalConfig& cfg, bool naive = false) const;

 private:
  const KnowledgeGraph& g_;
  VectorIndex nodes_;
  VectorIndex relations_;
  std::optional<VectorIndex> types_;
  const EmbeddingProvider& provider_;
  LabelNormalizer normalizer_;
};

enum class Task { kQuestionAnswering, kFactVerification };

struct EvalQuery {
  std::string id;
  std::string query;
  // QA: accepted answers. Verification: a single "Supported" / "Refuted".
  std::vector<std::string> gold;
};

// JSON lines: {"id", "query", "answers": [...]} or {"id", "query", "label"}.
// Missing ids default to the 1-based line number.
std::vector<EvalQuery> load_queries(const std::string& path);

struct StageTimings {
  double pattern_ms = 0.0;
  double vector_ms = 0.0;
  double search_ms = 0.0;
  double answer_ms = 0.0;
  double total_ms = 0.0;
};

struct EvalSubgraph {
  std::string verbalized;
  double gsd = 0.0;
};

struct EvalRecord {
  std::string id;
  std::string query;
  std::string pattern;  // serialize_pattern form; empty when generation failed
  std::size_t pattern_retries = 0;
  std::vector<EvalSubgraph> subgraphs;
  std::string raw_answer;
  std::string prediction;  // QA: the raw answer; verification: the verdict
  std::vector<std::string> gold;
  bool correct = false;
  std::string error;
  StageTimings timings;
};

bool is_correct(Task task, const std::string& prediction, const std::vector<std::string>& gold);

// Both throw std::invalid_argument on an empty record set. Correctness is
// recomputed from prediction and gold, not read from the flag.
double evaluate_hits_at_1(const std::vector<EvalRecord>& records);
double evaluate_accuracy(const std::vector<EvalRecord>& records);

struct PipelineOptions {
  Task task = Task::kQuestionAnswering;
  RetrievalConfig retrieval;
  std::size_t workers = 1;
  PatternRequestOptions pattern;
  AnswerRequestOptions answer{true, {}};
};

// Runs every query; the output follows input order whatever the worker count.
// Pattern-generation failures are recorded per query; chat client failures
// abort the run with ChatError.
std::vector<EvalRecord> run_pipeline(const std::vector<EvalQuery>& queries, const Retriever& retriever,
                                     const PromptTemplate& pattern_template, const PromptTemplate& answer_template,
                                     ChatClient& client, const PipelineOptions& options);

EvalRecord run_query(const EvalQuery& q, const Retriever& retriever, const PromptTemplate& pattern_template,
                     const PromptTemplate& answer_template, ChatClient& client, const PipelineOptions& options);

// Timings are left out unless asked for so that outputs stay byte-stable.
nlohmann::json to_json(const EvalRecord& r, bool with_timings);

struct BenchSample {
  double vector_ms = 0.0;
  double optimized_ms = 0.0;  // search phase only, best of the repeats
  double naive_ms = -1.0;     // -1 when naive was not run
  std::uint64_t explored_optimized = 0;
  std::uint64_t explored_naive = 0;
  std::uint64_t pruned = 0;
  std::size_t results = 0;
  bool identical = true;  // optimized output equals naive output
};

// Candidate search once, then the optimized (and optionally naive) search on
// the same candidate sets.
BenchSample bench_pattern(const Retriever& retriever, const PatternGraph& p, const RetrievalConfig& cfg,
                          bool with_naive, std::size_t repeats = 1);

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

}  // namespace simgrag
