#include "simgrag/differential.hpp"

#include <cmath>
#include <sstream>

#include "simgrag/oracle.hpp"

namespace simgrag {

namespace {

std::string describe(const ScoredSubgraph& s) {
  std::ostringstream out;
  out << "gsd=" << s.gsd << " triples=[";
  for (std::size_t i = 0; i < s.mapping.edge_map.size(); ++i) out << (i ? "," : "") << s.mapping.edge_map[i];
  out << "] nodes=[";
  for (std::size_t i = 0; i < s.mapping.node_map.size(); ++i) out << (i ? "," : "") << s.mapping.node_map[i].value;
  out << "]";
  return out.str();
}

}  // namespace

std::string compare_results(const std::vector<ScoredSubgraph>& expected, const std::vector<ScoredSubgraph>& actual) {
  if (expected.size() != actual.size()) {
    return "length " + std::to_string(actual.size()) + ", expected " + std::to_string(expected.size());
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& e = expected[i];
    const auto& a = actual[i];
    if (e.mapping != a.mapping || std::fabs(e.gsd - a.gsd) > kGsdTolerance) {
      return "rank " + std::to_string(i) + ": got " + describe(a) + ", expected " + describe(e);
    }
  }
  return {};
}

KnowledgeGraph reverse_graph(const KnowledgeGraph& g) {
  GraphBuilder b;
  for (const auto& label : g.entities().labels()) b.add_entity(label);
  for (const auto& t : g.triples()) {
    b.add(g.entity_label(t.tail), g.relation_label(t.relation), g.entity_label(t.head));
  }
  return std::move(b).finish();
}

GraphIndexes index_graph(const KnowledgeGraph& g, const EmbeddingProvider& provider) {
  return {build_index(g.entities().labels(), provider), build_index(g.relations().labels(), provider)};
}

DifferentialOutcome check_instance(const RandomInstance& inst, const DifferentialOptions& options) {
  DifferentialOutcome out;
  out.seed = inst.seed;
  out.shape = inst.shape;
  const auto& g = inst.graph;
  const auto& p = inst.pattern;

  const HashEmbeddingProvider provider(options.dim, options.embedding_seed);
  const auto idx = index_graph(g, provider);
  const auto pv = embed_pattern(p, provider);

  RetrievalConfig cfg;
  cfg.k = options.k;

  // Naive with full candidate sets against the oracle.
  const auto full = full_candidates(p, pv, g, idx.nodes, idx.relations);
  const auto naive_full = retrieve_topk_naive(p, g, full, cfg);
  out.results = naive_full.subgraphs.size();
  const auto oracle = brute_force_topk(p, g, pv, idx.nodes, idx.relations, cfg.k, cfg.dedup_automorphisms);
  if (auto diff = compare_results(oracle, naive_full.subgraphs); !diff.empty()) {
    out.failures.push_back("naive vs oracle: " + diff);
  }

  auto check_optimized = [&](const CandidateSets& cands, const RetrievalResult& naive, const std::string& label) {
    const auto opt = retrieve_topk_optimized(p, g, cands, cfg);
    if (auto diff = compare_results(naive.subgraphs, opt.subgraphs); !diff.empty()) {
      out.failures.push_back("optimized vs naive (" + label + "): " + diff);
    }
    if (opt.stats.explored > naive.stats.explored) {
      out.failures.push_back("optimized explored more states (" + label + "): " + std::to_string(opt.stats.explored) +
                             " > " + std::to_string(naive.stats.explored));
    }
    out.configs.push_back({label, naive.stats.explored, opt.stats.explored, naive.subgraphs.size() >= cfg.k});
  };
  check_optimized(full, naive_full, "full");

  for (const auto kn : options.restricted_counts) {
    for (const auto kr : options.restricted_counts) {
      RetrievalConfig restricted = cfg;
      restricted.k_n = kn;
      restricted.k_r = kr;
      const auto cands = build_candidates(p, pv, g, idx.nodes, idx.relations, nullptr, restricted);
      if (!cands.ok()) continue;
      const auto naive = retrieve_topk_naive(p, g, cands, restricted);
      check_optimized(cands, naive, "kn=" + std::to_string(kn) + ",kr=" + std::to_string(kr));
    }
  }

  if (options.check_direction) {
    const auto rg = reverse_graph(g);
    const auto rfull = full_candidates(p, pv, rg, idx.nodes, idx.relations);
    const auto reversed = retrieve_topk_optimized(p, rg, rfull, cfg);
    bool same = reversed.subgraphs.size() == naive_full.subgraphs.size();
    for (std::size_t i = 0; same && i < reversed.subgraphs.size(); ++i) {
      same = reversed.subgraphs[i].triple_key() == naive_full.subgraphs[i].triple_key() &&
             std::fabs(reversed.subgraphs[i].gsd - naive_full.subgraphs[i].gsd) <= kGsdTolerance;
    }
    if (!same) out.failures.push_back("reversed graph changed the retrieved triple sets or GSDs");
  }
  return out;
}

}  // namespace simgrag
