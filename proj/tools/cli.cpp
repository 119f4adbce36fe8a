#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "simgrag/differential.hpp"
#include "simgrag/embedding.hpp"
#include "simgrag/oracle.hpp"
#include "simgrag/pattern.hpp"
#include "simgrag/retrieval.hpp"
#include "simgrag/synthetic.hpp"

#ifndef SIMGRAG_DATA_DIR
#define SIMGRAG_DATA_DIR "data"
#endif

namespace simgrag::cli {

using nlohmann::json;

namespace {

// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // graph and embeddings
  std::string kg;
  std::string types;
  std::string emb_cache;
  std::size_t dim = 768;
  std::uint64_t embed_seed = 0;
  std::string embed_endpoint;
  std::string embed_model = "nomic-embed-text";
  bool underscores = false;

  // retrieval
  std::size_t k = 3;
  std::size_t kn = 16;
  std::size_t kr = 16;
  std::size_t kt = 16;
  bool no_prune = false;
  bool no_greedy = false;
  bool keep_automorphisms = false;

  // llm
  int shots = -1;
  std::string data_dir;
  std::string fixtures;
  std::string endpoint;
  std::string model = "llama3:70b";
  std::size_t max_retries = 2;

  // runs
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string queries;
  std::string claims;
  std::string out_path;
  bool timings = false;

  // ingest
  std::string out_dir;

  // retrieve
  std::string pattern_file;
  std::string pattern_text;
  bool naive = false;

  // bench
  bool synthetic = false;
  std::string patterns_file;
  std::size_t num_queries = 20;
  std::size_t nodes = 200000;
  std::size_t edges = 1000000;
  std::size_t relations = 200;
  bool compare_naive = false;
  std::size_t repeats = 1;

  // oracle-check
  std::size_t seeds = 100;
  std::size_t oracle_dim = 64;
};

RetrievalConfig retrieval_config(const Options& o) {
  RetrievalConfig cfg;
  cfg.k = o.k;
  cfg.k_n = o.kn;
  cfg.k_r = o.kr;
  cfg.k_t = o.kt;
  cfg.enable_pruning = !o.no_prune;
  cfg.enable_greedy = !o.no_greedy;
  cfg.dedup_automorphisms = !o.keep_automorphisms;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::unique_ptr<EmbeddingProvider> make_provider(const Options& o) {
  if (!o.embed_endpoint.empty()) {
    HttpEmbeddingConfig c;
    c.base_url = o.embed_endpoint;
    c.model = o.embed_model;
    c.dim = o.dim;
    if (const char* key = std::getenv("SIMGRAG_API_KEY")) c.api_key = key;
    return std::make_unique<HttpEmbeddingProvider>(c);
  }
  if (o.dim == 0) throw UsageError("--dim must be positive");
  return std::make_unique<HashEmbeddingProvider>(o.dim, o.embed_seed);
}

struct Loaded {
  KnowledgeGraph graph;
  std::unique_ptr<EmbeddingProvider> provider;
  std::unique_ptr<Retriever> retriever;
};

KnowledgeGraph load_graph(const Options& o) {
  auto g = load_triples_file(o.kg);
  if (!o.types.empty()) {
    std::ifstream in(o.types);
    if (!in) throw std::runtime_error("cannot open " + o.types);
    load_type_map(g, in);
  }
  return g;
}

std::unique_ptr<Loaded> load_all(const Options& o, std::ostream& err) {
  auto l = std::make_unique<Loaded>();
  l->graph = load_graph(o);
  l->provider = make_provider(o);
  BuildOptions bo;
  bo.normalizer.underscores_to_spaces = o.underscores;
  bo.cache_path = o.emb_cache;
  BuildStats s1, s2;
  auto nodes = build_index(l->graph.entities().labels(), *l->provider, bo, &s1);
  auto rels = build_index(l->graph.relations().labels(), *l->provider, bo, &s2);
  std::optional<VectorIndex> types;
  if (l->graph.has_type_map() && l->graph.type_labels().size() > 0) {
    types = build_index(l->graph.type_labels().labels(), *l->provider, bo);
  }
  err << "graph: " << l->graph.num_entities() << " entities, " << l->graph.num_relations() << " relations, "
      << l->graph.num_triples() << " triples; embedded " << s1.embedded + s2.embedded << ", cached "
      << s1.cache_hits + s2.cache_hits << "\n";
  l->retriever = std::make_unique<Retriever>(l->graph, std::move(nodes), std::move(rels), std::move(types),
                                             *l->provider, bo.normalizer);
  return l;
}

json subgraph_json(const ScoredSubgraph& s, std::size_t rank, const PatternGraph& p, const KnowledgeGraph& g) {
  json triples = json::array();
  for (const auto t : s.mapping.edge_map) {
    const auto& tr = g.triples()[t];
    triples.push_back({g.entity_label(tr.head), g.relation_label(tr.relation), g.entity_label(tr.tail)});
  }
  json nodes = json::object();
  for (std::size_t v = 0; v < p.num_nodes(); ++v) nodes[p.nodes()[v].text()] = g.entity_label(s.mapping.node_map[v]);
  return {{"rank", rank}, {"gsd", s.gsd}, {"triples", triples}, {"nodes", nodes}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

// ---------------------------------------------------------------- commands

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  const auto g = load_graph(o);
  std::filesystem::create_directories(o.out_dir);
  {
    std::ofstream f(std::filesystem::path(o.out_dir) / "triples.tsv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write into " + o.out_dir);
    write_sorted_tsv(g, f);
  }
  std::size_t typed = 0;
  if (g.has_type_map()) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (std::uint32_t t = 0; t < g.type_labels().size(); ++t) {
      for (const auto e : g.entities_of_type(t)) rows.emplace_back(g.type_labels().labels()[t], g.entity_label(e));
    }
    std::sort(rows.begin(), rows.end());
    std::ofstream f(std::filesystem::path(o.out_dir) / "types.tsv", std::ios::binary);
    for (const auto& [type, entity] : rows) f << type << '\t' << entity << '\n';
    typed = rows.size();
  }
  out << json{{"entities", g.num_entities()},
              {"relations", g.num_relations()},
              {"triples", g.num_triples()},
              {"type_assignments", typed},
              {"out", o.out_dir}}
             .dump()
      << "\n";
  err << "wrote " << g.num_triples() << " triples to " << o.out_dir << "\n";
  return kOk;
}

int cmd_index(const Options& o, std::ostream& out, std::ostream& err) {
  const auto g = load_graph(o);
  const auto provider = make_provider(o);
  BuildOptions bo;
  bo.normalizer.underscores_to_spaces = o.underscores;
  bo.cache_path = o.emb_cache;
  json report = json::object();
  auto run = [&](const char* name, const std::vector<std::string>& labels) {
    if (labels.empty()) return;
    BuildStats s;
    build_index(labels, *provider, bo, &s);
    report[name] = {{"labels", labels.size()}, {"embedded", s.embedded}, {"cache_hits", s.cache_hits}};
  };
  run("entities", g.entities().labels());
  run("relations", g.relations().labels());
  if (g.has_type_map()) run("types", g.type_labels().labels());
  report["cache"] = o.emb_cache;
  report["dim"] = provider->dim();
  out << report.dump() << "\n";
  err << "embedding cache: " << o.emb_cache << "\n";
  return kOk;
}

int cmd_retrieve(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.pattern_file.empty() == o.pattern_text.empty()) throw UsageError("give exactly one of --pattern / --pattern-text");
  const auto cfg = retrieval_config(o);
  const auto text = o.pattern_file.empty() ? o.pattern_text : read_text(o.pattern_file);
  const auto pattern = parse_llm_pattern(text);
  const auto l = load_all(o, err);
  const auto r = l->retriever->retrieve(pattern, cfg, o.naive);
  for (std::size_t i = 0; i < r.result.subgraphs.size(); ++i) {
    out << subgraph_json(r.result.subgraphs[i], i + 1, pattern, l->graph).dump() << "\n";
  }
  err << "shape: " << to_string(classify_pattern(pattern)) << "; " << r.result.subgraphs.size() << " subgraphs; "
      << "explored " << r.result.stats.explored << ", pruned " << r.result.stats.pruned << "; vector search "
      << fixed(r.vector_ms) << " ms, search " << fixed(r.search_ms) << " ms\n";
  return kOk;
}

std::unique_ptr<ChatClient> make_chat_client(const Options& o) {
  if (!o.fixtures.empty()) return std::make_unique<ScriptedChatClient>(o.fixtures);
  if (o.endpoint.empty()) throw UsageError("give --fixtures for a scripted run or --endpoint for a live model");
  HttpChatConfig c;
  c.base_url = o.endpoint;
  c.model = o.model;
  if (const char* key = std::getenv("SIMGRAG_API_KEY")) c.api_key = key;
  return std::make_unique<HttpChatClient>(c);
}

PipelineOptions pipeline_options(const Options& o, Task task) {
  PipelineOptions po;
  po.task = task;
  po.retrieval = retrieval_config(o);
  po.workers = std::max<std::size_t>(o.workers, 1);
  po.pattern.max_retries = o.max_retries;
  return po;
}

void print_summary(const std::vector<EvalRecord>& records, Task task, std::ostream& err) {
  std::vector<double> pattern, vec, search, answer, total;
  std::size_t failed = 0;
  for (const auto& r : records) {
    pattern.push_back(r.timings.pattern_ms);
    vec.push_back(r.timings.vector_ms);
    search.push_back(r.timings.search_ms);
    answer.push_back(r.timings.answer_ms);
    total.push_back(r.timings.total_ms);
    failed += r.error.empty() ? 0 : 1;
  }
  const bool qa = task == Task::kQuestionAnswering;
  const double score = qa ? evaluate_hits_at_1(records) : evaluate_accuracy(records);
  err << "+----------------------+------------+\n";
  err << "| queries              | " << std::setw(10) << records.size() << " |\n";
  err << "| " << std::left << std::setw(20) << (qa ? "Hits@1" : "accuracy") << std::right << " | " << std::setw(10)
      << fixed(score) << " |\n";
  err << "| pattern failures     | " << std::setw(10) << failed << " |\n";
  err << "| mean pattern ms      | " << std::setw(10) << fixed(mean(pattern)) << " |\n";
  err << "| mean vector ms       | " << std::setw(10) << fixed(mean(vec)) << " |\n";
  err << "| mean search ms       | " << std::setw(10) << fixed(mean(search)) << " |\n";
  err << "| mean answer ms       | " << std::setw(10) << fixed(mean(answer)) << " |\n";
  err << "| mean total ms        | " << std::setw(10) << fixed(mean(total)) << " |\n";
  err << "+----------------------+------------+\n";
}

int cmd_run_queries(const Options& o, Task task, std::ostream& out, std::ostream& err) {
  const auto queries = load_queries(o.queries);
  if (queries.empty()) throw UsageError("query file " + o.queries + " holds no queries");
  const auto prompts = load_prompts(o.data_dir, task == Task::kQuestionAnswering ? "kgqa" : "factkg", o.shots);
  const auto options = pipeline_options(o, task);
  auto client = make_chat_client(o);
  const auto l = load_all(o, err);
  const auto records = run_pipeline(queries, *l->retriever, prompts.pattern, prompts.answer, *client, options);

  std::ofstream file;
  if (!o.out_path.empty()) {
    file.open(o.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + o.out_path);
  }
  std::ostream& sink = o.out_path.empty() ? out : file;
  for (const auto& r : records) sink << to_json(r, o.timings).dump() << "\n";
  print_summary(records, task, err);
  return kOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = retrieval_config(o);
  std::unique_ptr<Loaded> l;
  std::vector<PatternGraph> patterns;
  if (o.synthetic) {
    if (o.num_queries == 0) throw UsageError("bench needs at least one query (--queries)");
    if (!o.kg.empty()) throw UsageError("--synthetic and --kg are exclusive");
    std::mt19937_64 rng(o.seed);
    l = std::make_unique<Loaded>();
    err << "generating synthetic graph: " << o.nodes << " nodes, " << o.edges << " edges\n";
    l->graph = random_graph(rng, {o.nodes, o.edges, o.relations});
    l->provider = make_provider(o);
    BuildOptions bo;
    bo.cache_path = o.emb_cache;
    auto nodes = build_index(l->graph.entities().labels(), *l->provider, bo);
    auto rels = build_index(l->graph.relations().labels(), *l->provider, bo);
    l->retriever = std::make_unique<Retriever>(l->graph, std::move(nodes), std::move(rels), std::nullopt, *l->provider);
    patterns = two_hop_patterns(rng, l->graph, o.num_queries);
  } else {
    if (o.kg.empty() || o.patterns_file.empty()) throw UsageError("bench needs --synthetic or both --kg and --patterns");
    std::ifstream in(o.patterns_file);
    if (!in) throw std::runtime_error("cannot open " + o.patterns_file);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find('(') != std::string::npos) patterns.push_back(parse_llm_pattern(line));
    }
    if (patterns.empty()) throw UsageError("bench needs at least one query; " + o.patterns_file + " has none");
    l = load_all(o, err);
  }

  std::vector<double> vec, opt, naive;
  std::size_t fired = 0, faster = 0, mismatches = 0;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto s = bench_pattern(*l->retriever, patterns[i], cfg, o.compare_naive, o.repeats);
    vec.push_back(s.vector_ms);
    opt.push_back(s.optimized_ms);
    json row = {{"query", i},
                {"pattern", serialize_pattern(patterns[i])},
                {"vector_ms", s.vector_ms},
                {"optimized_ms", s.optimized_ms},
                {"explored_optimized", s.explored_optimized},
                {"pruned", s.pruned},
                {"results", s.results}};
    if (o.compare_naive) {
      naive.push_back(s.naive_ms);
      row["naive_ms"] = s.naive_ms;
      row["explored_naive"] = s.explored_naive;
      row["identical"] = s.identical;
      mismatches += s.identical ? 0 : 1;
      if (s.pruned > 0) {
        ++fired;
        faster += s.optimized_ms < s.naive_ms ? 1 : 0;
      }
    }
    out << row.dump() << "\n";
  }
  err << "queries " << patterns.size() << "\n";
  err << "vector search ms      mean " << fixed(mean(vec)) << "  median " << fixed(median(vec)) << "\n";
  err << "optimized search ms   mean " << fixed(mean(opt)) << "  median " << fixed(median(opt)) << "\n";
  if (o.compare_naive) {
    err << "naive search ms       mean " << fixed(mean(naive)) << "  median " << fixed(median(naive)) << "\n";
    err << "pruning fired on " << fired << " queries; optimized faster on " << faster << "\n";
    if (mismatches) {
      err << mismatches << " queries where optimized and naive outputs differ\n";
      return kMismatch;
    }
  }
  return kOk;
}

int cmd_oracle_check(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.seeds == 0) throw UsageError("--seeds must be positive");
  DifferentialOptions d;
  d.k = o.k;
  d.dim = o.oracle_dim;
  d.embedding_seed = o.embed_seed;
  std::size_t failed = 0, filled = 0, strictly = 0;
  for (std::uint64_t s = o.seed; s < o.seed + o.seeds; ++s) {
    const auto inst = random_instance(s);
    const auto r = check_instance(inst, d);
    for (const auto& c : r.configs) {
      if (!c.queue_filled) continue;
      ++filled;
      strictly += c.explored_optimized < c.explored_naive ? 1 : 0;
    }
    if (!r.ok()) {
      ++failed;
      for (const auto& f : r.failures) err << "seed " << s << " (" << to_string(r.shape) << "): " << f << "\n";
    }
  }
  out << json{{"instances", o.seeds}, {"failed", failed}, {"filled_configs", filled}, {"fewer_states", strictly}}.dump()
      << "\n";
  err << (failed ? "MISMATCH" : "ok") << ": " << o.seeds - failed << "/" << o.seeds << " instances agree\n";
  return failed ? kMismatch : kOk;
}

int cmd_record_fixtures(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.queries.empty() && o.claims.empty()) throw UsageError("give --queries and/or --claims");
  if (o.out_path.empty()) throw UsageError("--out is required");
  const auto l = load_all(o, err);
  const auto qa = load_prompts(o.data_dir, "kgqa", o.shots);
  const auto fv = load_prompts(o.data_dir, "factkg", o.shots);
  const auto recorded =
      record_fixtures(*l->retriever, {o.queries, o.claims}, qa, fv, pipeline_options(o, Task::kQuestionAnswering));
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + o.out_path);
  for (const auto& [fp, response] : recorded) f << json{{"fingerprint", fp}, {"response", response}}.dump() << "\n";
  out << json{{"fixtures", recorded.size()}, {"out", o.out_path}}.dump() << "\n";
  return kOk;
}

// Replies with responses[i] on the i-th attempt of a conversation.
class SequenceClient final : public ChatClient {
 public:
  explicit SequenceClient(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions&) override {
    std::size_t users = 0;
    for (const auto& m : messages) users += m.role == "user" ? 1 : 0;
    if (users == 0 || users > responses_.size()) throw ChatError("scripted sequence exhausted");
    return responses_[users - 1];
  }

 private:
  std::vector<std::string> responses_;
};

class FixedClient final : public ChatClient {
 public:
  explicit FixedClient(std::string response) : response_(std::move(response)) {}
  std::string complete(const std::vector<ChatMessage>&, const ChatOptions&) override { return response_; }

 private:
  std::string response_;
};

std::string graph_refs(const std::vector<std::size_t>& ids) {
  std::string s = ids.size() > 1 ? "graphs " : "graph ";
  for (const auto i : ids) s += "[" + std::to_string(i + 1) + "]";
  return s;
}

std::vector<json> read_json_lines(const std::string& path) {
  std::vector<json> out;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace

std::string default_data_dir() {
  if (const char* env = std::getenv("SIMGRAG_DATA_DIR")) return env;
  return SIMGRAG_DATA_DIR;
}

PromptSet load_prompts(const std::string& data_dir, const std::string& style, int shots) {
  namespace fs = std::filesystem;
  const fs::path dir = data_dir.empty() ? fs::path(default_data_dir()) : fs::path(data_dir);
  PromptSet set{PromptTemplate::from_file((dir / "templates" / (style + "_pattern.json")).string()),
                PromptTemplate::from_file((dir / "templates" / (style + "_answer.json")).string())};
  set.pattern.load_shots((dir / "shots" / (style + "_pattern.json")).string());
  set.answer.load_shots((dir / "shots" / (style + "_answer.json")).string());
  for (auto* t : {&set.pattern, &set.answer}) {
    const auto n = shots < 0 ? std::min<std::size_t>(12, t->bank_size()) : static_cast<std::size_t>(shots);
    if (n > t->bank_size()) {
      throw UsageError("--shots " + std::to_string(n) + " exceeds the " + t->name() + " bank of " +
                       std::to_string(t->bank_size()));
    }
    t->set_shot_count(n);
  }
  return set;
}

std::map<std::string, std::string> record_fixtures(const Retriever& retriever, const FixtureSources& sources,
                                                   const PromptSet& qa, const PromptSet& fv,
                                                   const PipelineOptions& options) {
  std::map<std::string, std::string> all;
  const auto& g = retriever.graph();

  auto run = [&](const json& line, const PromptSet& prompts, bool verify) {
    const auto query = line.at("query").get<std::string>();
    SequenceClient script(line.at("pattern_responses").get<std::vector<std::string>>());
    RecordingChatClient pattern_rec(script);
    std::optional<PatternGraph> pattern;
    try {
      pattern.emplace(query_to_pattern(query, prompts.pattern, pattern_rec, options.pattern).pattern);
    } catch (const PatternGenerationError&) {
    }
    for (const auto& [fp, r] : pattern_rec.recorded()) all[fp] = r;
    if (!pattern) return;

    const auto subgraphs = retriever.retrieve(*pattern, options.retrieval).result.subgraphs;
    std::vector<std::size_t> best;
    for (std::size_t i = 0; i < subgraphs.size(); ++i) {
      if (subgraphs[i].gsd <= subgraphs[0].gsd + kGsdTolerance) best.push_back(i);
    }

    std::string answer;
    if (verify) {
      answer = !subgraphs.empty() && subgraphs[0].gsd <= kGsdTolerance
                   ? "As " + graph_refs({0}) + " completely supports the statement, the answer is True."
                   : "As no evidence completely supports the statement, the answer is False.";
    } else {
      const auto term = line.at("answer_term").get<std::string>();
      std::size_t node = pattern->num_nodes();
      for (std::size_t v = 0; v < pattern->num_nodes(); ++v) {
        if (pattern->nodes()[v].text() == term) node = v;
      }
      if (node == pattern->num_nodes()) throw std::runtime_error("answer_term '" + term + "' is not a pattern node");
      std::vector<std::string> names;
      for (const auto i : best) {
        const auto& name = g.entity_label(subgraphs[i].mapping.node_map[node]);
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      }
      if (names.empty()) {
        answer = "The evidences do not contain the answer.";
      } else {
        answer = "According to " + graph_refs(best) + ", the answer is " + names[0];
        for (std::size_t i = 1; i < names.size(); ++i) answer += " or " + names[i];
        answer += ".";
      }
    }
    if (subgraphs.empty() && !options.answer.allow_empty_evidence) return;
    FixedClient reply(answer);
    RecordingChatClient answer_rec(reply);
    generate_answer(query, subgraphs, g, prompts.answer, answer_rec, options.answer);
    for (const auto& [fp, r] : answer_rec.recorded()) all[fp] = r;
  };

  if (!sources.queries_path.empty()) {
    for (const auto& line : read_json_lines(sources.queries_path)) run(line, qa, false);
  }
  if (!sources.claims_path.empty()) {
    for (const auto& line : read_json_lines(sources.claims_path)) run(line, fv, true);
  }
  return all;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Subgraph-retrieval RAG over knowledge graphs"};
  app.name("simgrag");
  app.require_subcommand(1);

  auto graph_opts = [&](CLI::App* c, bool required) {
    auto* kg = c->add_option("--kg", o.kg, "knowledge graph TSV (head, relation, tail)")->check(CLI::ExistingFile);
    if (required) kg->required();
    c->add_option("--types", o.types, "type map TSV (type, entity)")->check(CLI::ExistingFile);
    c->add_option("--emb-cache", o.emb_cache, "embedding cache file (read and updated)");
    c->add_option("--dim", o.dim, "embedding dimension")->capture_default_str();
    c->add_option("--embed-seed", o.embed_seed, "hash embedding seed")->capture_default_str();
    c->add_option("--embed-endpoint", o.embed_endpoint, "HTTP embedding endpoint base URL (default: hash embeddings)");
    c->add_option("--embed-model", o.embed_model, "embedding model name")->capture_default_str();
    c->add_flag("--underscores-to-spaces", o.underscores, "embed labels with '_' replaced by ' '");
  };
  auto retrieval_opts = [&](CLI::App* c) {
    c->add_option("--k", o.k, "subgraphs to retrieve")->capture_default_str();
    c->add_option("--kn", o.kn, "candidate entities per Known node")->capture_default_str();
    c->add_option("--kr", o.kr, "candidate relations per Known relation")->capture_default_str();
    c->add_option("--kt", o.kt, "candidate types per typed Unknown node")->capture_default_str();
    c->add_flag("--no-prune", o.no_prune, "disable lower-bound pruning");
    c->add_flag("--no-greedy", o.no_greedy, "disable distance-ordered expansion");
    c->add_flag("--keep-automorphisms", o.keep_automorphisms, "report every mapping of the same triple set");
  };
  auto llm_opts = [&](CLI::App* c) {
    c->add_option("--shots", o.shots, "few-shot examples per prompt (default: min(12, bank))");
    c->add_option("--data-dir", o.data_dir, "directory with templates/ and shots/");
    c->add_option("--fixtures", o.fixtures, "scripted responses (JSON lines)")->check(CLI::ExistingFile);
    c->add_option("--endpoint", o.endpoint, "chat endpoint base URL; token from SIMGRAG_API_KEY");
    c->add_option("--model", o.model, "chat model name")->capture_default_str();
    c->add_option("--max-retries", o.max_retries, "pattern re-prompts after unparsable output")->capture_default_str();
    c->add_option("--workers", o.workers, "queries evaluated concurrently")->capture_default_str();
    c->add_option("--seed", o.seed, "random seed")->capture_default_str();
    c->add_option("--out", o.out_path, "write records here instead of stdout");
    c->add_flag("--timings", o.timings, "include per-stage timings in the records");
  };

  auto* ingest = app.add_subcommand("ingest", "validate a triple file and write normalized graph artifacts");
  graph_opts(ingest, true);
  ingest->add_option("--out", o.out_dir, "output directory")->required();

  auto* index = app.add_subcommand("index", "embed entity, relation and type labels into a cache");
  graph_opts(index, true);
  index->get_option("--emb-cache")->required();

  auto* retrieve = app.add_subcommand("retrieve", "top-k subgraphs for a pattern");
  graph_opts(retrieve, true);
  retrieval_opts(retrieve);
  retrieve->add_option("--pattern", o.pattern_file, "pattern file")->check(CLI::ExistingFile);
  retrieve->add_option("--pattern-text", o.pattern_text, "inline pattern, e.g. '(\"a\", \"r\", \"UNKNOWN x 1\")'");
  retrieve->add_flag("--naive", o.naive, "plain enumeration without pruning or greedy order");

  auto* ask = app.add_subcommand("ask", "question answering over a query file");
  graph_opts(ask, true);
  retrieval_opts(ask);
  llm_opts(ask);
  ask->add_option("--queries", o.queries, "JSON lines with id, query, answers")->required()->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "fact verification over a statement file");
  graph_opts(verify, true);
  retrieval_opts(verify);
  llm_opts(verify);
  verify->add_option("--queries", o.queries, "JSON lines with id, query, label")->required()->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "retrieval timing: vector search and subgraph search separately");
  graph_opts(bench, false);
  retrieval_opts(bench);
  bench->add_option("--patterns", o.patterns_file, "one pattern per line (with --kg)")->check(CLI::ExistingFile);
  bench->add_flag("--synthetic", o.synthetic, "generate a random graph and 2-hop patterns");
  bench->add_option("--queries", o.num_queries, "synthetic pattern count")->capture_default_str();
  bench->add_option("--nodes", o.nodes, "synthetic entities")->capture_default_str();
  bench->add_option("--edges", o.edges, "synthetic triples")->capture_default_str();
  bench->add_option("--relations", o.relations, "synthetic relations")->capture_default_str();
  bench->add_option("--seed", o.seed, "random seed")->capture_default_str();
  bench->add_option("--repeats", o.repeats, "timing repeats per query (best kept)")->capture_default_str();
  bench->add_flag("--compare-naive", o.compare_naive, "also time the naive search");

  auto* oracle = app.add_subcommand("oracle-check", "differential tests on seeded random instances");
  oracle->add_option("--seeds", o.seeds, "number of instances")->capture_default_str();
  oracle->add_option("--seed", o.seed, "first seed")->capture_default_str();
  oracle->add_option("--k", o.k, "subgraphs to retrieve")->capture_default_str();
  oracle->add_option("--dim", o.oracle_dim, "hash embedding dimension")->capture_default_str();
  oracle->add_option("--embed-seed", o.embed_seed, "hash embedding seed")->capture_default_str();

  auto* record = app.add_subcommand("record-fixtures", "freeze scripted toy responses into a fixture file");
  record->group("");  // hidden from --help
  graph_opts(record, true);
  retrieval_opts(record);
  record->add_option("--queries", o.queries, "QA set with pattern_responses / answer_term")->check(CLI::ExistingFile);
  record->add_option("--claims", o.claims, "verification set with pattern_responses")->check(CLI::ExistingFile);
  record->add_option("--shots", o.shots, "few-shot examples per prompt");
  record->add_option("--data-dir", o.data_dir, "directory with templates/ and shots/");
  record->add_option("--max-retries", o.max_retries, "pattern re-prompts")->capture_default_str();
  record->add_option("--out", o.out_path, "fixture file to write");

  std::vector<std::string> argv_store{"simgrag"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o, out, err);
    if (index->parsed()) return cmd_index(o, out, err);
    if (retrieve->parsed()) return cmd_retrieve(o, out, err);
    if (ask->parsed()) return cmd_run_queries(o, Task::kQuestionAnswering, out, err);
    if (verify->parsed()) return cmd_run_queries(o, Task::kFactVerification, out, err);
    if (bench->parsed()) return cmd_bench(o, out, err);
    if (oracle->parsed()) return cmd_oracle_check(o, out, err);
    if (record->parsed()) return cmd_record_fixtures(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ChatError& e) {
    err << "upstream failure: " << e.what() << "\n";
    return kUpstream;
  } catch (const EmbeddingError& e) {
    err << "embedding error: " << e.what() << "\n";
    return kDataError;
  } catch (const ParseError& e) {
    err << "data error at line " << e.line() << ": " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace simgrag::cli
