#include "simgrag/pipeline.hpp"

#include <chrono>
#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace simgrag {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Retriever::Retriever(const KnowledgeGraph& g, VectorIndex nodes, VectorIndex relations,
                     std::optional<VectorIndex> types, const EmbeddingProvider& provider, LabelNormalizer normalizer)
    : g_(g),
      nodes_(std::move(nodes)),
      relations_(std::move(relations)),
      types_(std::move(types)),
      provider_(provider),
      normalizer_(normalizer) {
  if (nodes_.size() != g_.num_entities() || relations_.size() != g_.num_relations()) {
    throw std::invalid_argument("index sizes do not match the graph");
  }
  if (nodes_.dim() != provider_.dim() || relations_.dim() != provider_.dim()) {
    throw std::invalid_argument("index dim does not match the embedding provider");
  }
}

PatternVectors Retriever::embed(const PatternGraph& p) const {
  return embed_pattern(p, provider_, normalizer_, types_.has_value());
}

TimedRetrieval Retriever::retrieve(const PatternGraph& p, const RetrievalConfig& cfg, bool naive) const {
  cfg.validate();
  TimedRetrieval out;
  auto start = Clock::now();
  const auto pv = embed(p);
  const auto cands = build_candidates(p, pv, g_, nodes_, relations_, types_ ? &*types_ : nullptr, cfg);
  out.vector_ms = ms_since(start);
  start = Clock::now();
  if (cands.ok()) out.result = naive ? retrieve_topk_naive(p, g_, cands, cfg) : retrieve_topk_optimized(p, g_, cands, cfg);
  out.search_ms = ms_since(start);
  return out;
}

std::vector<EvalQuery> load_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open query file " + path);
  std::vector<EvalQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(line, nullptr, false);
    const auto where = path + ":" + std::to_string(line_no);
    if (j.is_discarded() || !j.is_object() || !j.contains("query") || !j["query"].is_string()) {
      throw std::runtime_error(where + ": expected an object with a \"query\" string");
    }
    EvalQuery q;
    q.query = j["query"].get<std::string>();
    if (j.contains("id")) q.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    else q.id = std::to_string(line_no);
    try {
      if (j.contains("answers")) q.gold = j["answers"].get<std::vector<std::string>>();
      else if (j.contains("label")) q.gold = {j["label"].get<std::string>()};
    } catch (const json::exception&) {
      throw std::runtime_error(where + ": \"answers\" must be a string list and \"label\" a string");
    }
    out.push_back(std::move(q));
  }
  return out;
}

bool is_correct(Task task, const std::string& prediction, const std::vector<std::string>& gold) {
  if (task == Task::kQuestionAnswering) return answer_contains(prediction, gold);
  return !gold.empty() && prediction == gold.front() && prediction != to_string(Verdict::kUnknown);
}

namespace {

double fraction_correct(const std::vector<EvalRecord>& records, Task task) {
  if (records.empty()) throw std::invalid_argument("cannot evaluate an empty record set");
  std::size_t hits = 0;
  for (const auto& r : records) hits += is_correct(task, r.prediction, r.gold) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

}  // namespace

double evaluate_hits_at_1(const std::vector<EvalRecord>& records) {
  return fraction_correct(records, Task::kQuestionAnswering);
}

double evaluate_accuracy(const std::vector<EvalRecord>& records) {
  return fraction_correct(records, Task::kFactVerification);
}

EvalRecord run_query(const EvalQuery& q, const Retriever& retriever, const PromptTemplate& pattern_template,
                     const PromptTemplate& answer_template, ChatClient& client, const PipelineOptions& options) {
  EvalRecord r;
  r.id = q.id;
  r.query = q.query;
  r.gold = q.gold;
  const auto total_start = Clock::now();

  auto start = Clock::now();
  std::optional<PatternGraph> pattern;
  try {
    auto gen = query_to_pattern(q.query, pattern_template, client, options.pattern);
    r.pattern_retries = gen.retries;
    pattern.emplace(std::move(gen.pattern));
    r.pattern = serialize_pattern(*pattern);
  } catch (const PatternGenerationError& e) {
    r.error = e.what();
  }
  r.timings.pattern_ms = ms_since(start);

  std::vector<ScoredSubgraph> subgraphs;
  if (pattern) {
    auto retrieved = retriever.retrieve(*pattern, options.retrieval);
    r.timings.vector_ms = retrieved.vector_ms;
    r.timings.search_ms = retrieved.search_ms;
    subgraphs = std::move(retrieved.result.subgraphs);
    for (const auto& s : subgraphs) {
      r.subgraphs.push_back({verbalize_subgraph(s, retriever.graph(), answer_template.quote()), s.gsd});
    }

    start = Clock::now();
    if (!subgraphs.empty() || options.answer.allow_empty_evidence) {
      r.raw_answer = generate_answer(q.query, subgraphs, retriever.graph(), answer_template, client, options.answer).answer;
    }
    r.timings.answer_ms = ms_since(start);
  }

  r.prediction = options.task == Task::kQuestionAnswering ? r.raw_answer
                                                          : std::string(to_string(extract_verdict(r.raw_answer)));
  r.correct = is_correct(options.task, r.prediction, r.gold);
  r.timings.total_ms = ms_since(total_start);
  return r;
}

std::vector<EvalRecord> run_pipeline(const std::vector<EvalQuery>& queries, const Retriever& retriever,
                                     const PromptTemplate& pattern_template, const PromptTemplate& answer_template,
                                     ChatClient& client, const PipelineOptions& options) {
  options.retrieval.validate();
  std::vector<EvalRecord> out(queries.size());
  std::vector<std::exception_ptr> errors(queries.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      try {
        out[i] = run_query(queries[i], retriever, pattern_template, answer_template, client, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = std::max<std::size_t>(1, std::min(options.workers, queries.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

json to_json(const EvalRecord& r, bool with_timings) {
  json j = {{"id", r.id},
            {"query", r.query},
            {"pattern", r.pattern},
            {"pattern_retries", r.pattern_retries},
            {"raw_answer", r.raw_answer},
            {"prediction", r.prediction},
            {"gold", r.gold},
            {"correct", r.correct}};
  j["subgraphs"] = json::array();
  for (const auto& s : r.subgraphs) j["subgraphs"].push_back({{"gsd", s.gsd}, {"triples", s.verbalized}});
  if (!r.error.empty()) j["error"] = r.error;
  if (with_timings) {
    j["timings_ms"] = {{"pattern", r.timings.pattern_ms}, {"vector_search", r.timings.vector_ms},
                       {"search", r.timings.search_ms},   {"answer", r.timings.answer_ms},
                       {"total", r.timings.total_ms}};
  }
  return j;
}

}  // namespace simgrag

namespace simgrag {

BenchSample bench_pattern(const Retriever& retriever, const PatternGraph& p, const RetrievalConfig& cfg,
                          bool with_naive, std::size_t repeats) {
  cfg.validate();
  BenchSample out;
  const auto& g = retriever.graph();
  auto start = Clock::now();
  const auto pv = retriever.embed(p);
  const auto cands = build_candidates(p, pv, g, retriever.node_index(), retriever.relation_index(), nullptr, cfg);
  out.vector_ms = ms_since(start);
  if (!cands.ok()) return out;

  repeats = std::max<std::size_t>(repeats, 1);
  RetrievalResult opt;
  for (std::size_t r = 0; r < repeats; ++r) {
    start = Clock::now();
    opt = retrieve_topk_optimized(p, g, cands, cfg);
    const auto ms = ms_since(start);
    out.optimized_ms = r == 0 ? ms : std::min(out.optimized_ms, ms);
  }
  out.explored_optimized = opt.stats.explored;
  out.pruned = opt.stats.pruned;
  out.results = opt.subgraphs.size();
  if (with_naive) {
    RetrievalResult naive;
    for (std::size_t r = 0; r < repeats; ++r) {
      start = Clock::now();
      naive = retrieve_topk_naive(p, g, cands, cfg);
      const auto ms = ms_since(start);
      out.naive_ms = r == 0 ? ms : std::min(out.naive_ms, ms);
    }
    out.explored_naive = naive.stats.explored;
    out.identical = naive.subgraphs.size() == opt.subgraphs.size();
    for (std::size_t i = 0; out.identical && i < opt.subgraphs.size(); ++i) {
      out.identical = naive.subgraphs[i].mapping == opt.subgraphs[i].mapping &&
                      naive.subgraphs[i].gsd == opt.subgraphs[i].gsd;
    }
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace simgrag
