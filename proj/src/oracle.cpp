#include "simgrag/oracle.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace simgrag {

namespace {

void check_limits(const PatternGraph& p, const KnowledgeGraph& g, const OracleLimits& limits) {
  if (g.num_entities() > limits.max_entities) {
    throw InstanceTooLarge("oracle refuses graphs with more than " + std::to_string(limits.max_entities) +
                           " entities (got " + std::to_string(g.num_entities()) + ")");
  }
  if (p.num_triples() > limits.max_pattern_triples) {
    throw InstanceTooLarge("oracle refuses patterns with more than " + std::to_string(limits.max_pattern_triples) +
                           " triples (got " + std::to_string(p.num_triples()) + ")");
  }
}

using EntityPair = std::pair<std::uint32_t, std::uint32_t>;

EntityPair unordered(EntityId a, EntityId b) { return std::minmax(a.value, b.value); }

class Enumerator {
 public:
  Enumerator(const PatternGraph& p, const KnowledgeGraph& g) : p_(p), g_(g), nodes_(p.num_nodes()) {
    // Triples between two distinct entities, keyed by the unordered pair.
    for (TripleIndex i = 0; i < g.num_triples(); ++i) {
      const auto& t = g.triples()[i];
      if (t.head != t.tail) between_[unordered(t.head, t.tail)].push_back(i);
    }
  }

  std::vector<IsoMapping> run() {
    assign_node(0);
    return std::move(out_);
  }

 private:
  const std::vector<TripleIndex>* triples_between(EntityId a, EntityId b) const {
    auto it = between_.find(unordered(a, b));
    return it == between_.end() ? nullptr : &it->second;
  }

  void assign_node(std::size_t v) {
    if (v == p_.num_nodes()) {
      edges_.assign(p_.num_triples(), 0);
      assign_edge(0);
      return;
    }
    for (std::uint32_t e = 0; e < g_.num_entities(); ++e) {
      const EntityId candidate{e};
      if (std::find(nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(v), candidate) !=
          nodes_.begin() + static_cast<std::ptrdiff_t>(v)) {
        continue;
      }
      nodes_[v] = candidate;
      bool feasible = true;
      for (const auto t : p_.incident(v)) {
        const auto other = p_.head_node(t) == v ? p_.tail_node(t) : p_.head_node(t);
        if (other < v && !triples_between(candidate, nodes_[other])) {
          feasible = false;
          break;
        }
      }
      if (feasible) assign_node(v + 1);
    }
  }

  void assign_edge(std::size_t t) {
    if (t == p_.num_triples()) {
      out_.push_back({nodes_, edges_});
      return;
    }
    const auto* options = triples_between(nodes_[p_.head_node(t)], nodes_[p_.tail_node(t)]);
    for (const auto ti : *options) {
      if (std::find(edges_.begin(), edges_.begin() + static_cast<std::ptrdiff_t>(t), ti) !=
          edges_.begin() + static_cast<std::ptrdiff_t>(t)) {
        continue;
      }
      edges_[t] = ti;
      assign_edge(t + 1);
    }
  }

  const PatternGraph& p_;
  const KnowledgeGraph& g_;
  std::map<EntityPair, std::vector<TripleIndex>> between_;
  std::vector<EntityId> nodes_;
  std::vector<TripleIndex> edges_;
  std::vector<IsoMapping> out_;
};

std::vector<TripleIndex> sorted_key(const IsoMapping& m) {
  auto key = m.edge_map;
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace

std::vector<IsoMapping> enumerate_all_mappings(const PatternGraph& p, const KnowledgeGraph& g, bool dedup,
                                               const OracleLimits& limits) {
  check_limits(p, g, limits);
  auto all = Enumerator(p, g).run();
  if (dedup) {
    std::map<std::vector<TripleIndex>, IsoMapping> best;
    for (auto& m : all) {
      auto key = sorted_key(m);
      auto it = best.find(key);
      if (it == best.end()) best.emplace(std::move(key), std::move(m));
      else if (m < it->second) it->second = std::move(m);
    }
    all.clear();
    for (auto& [key, m] : best) all.push_back(std::move(m));
  }
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<ScoredSubgraph> brute_force_topk(const PatternGraph& p, const KnowledgeGraph& g, const PatternVectors& pv,
                                             const VectorIndex& node_index, const VectorIndex& rel_index,
                                             std::size_t k, bool dedup, const OracleLimits& limits) {
  std::vector<ScoredSubgraph> scored;
  for (auto& m : enumerate_all_mappings(p, g, false, limits)) {
    const double gsd = compute_gsd(p, g, m, pv, node_index, rel_index);
    scored.push_back({std::move(m), gsd});
  }
  if (dedup) {
    std::map<std::vector<TripleIndex>, ScoredSubgraph> best;
    for (auto& s : scored) {
      auto key = s.triple_key();
      auto it = best.find(key);
      if (it == best.end()) best.emplace(std::move(key), std::move(s));
      else if (ranks_before(s, it->second)) it->second = std::move(s);
    }
    scored.clear();
    for (auto& [key, s] : best) scored.push_back(std::move(s));
  }
  std::sort(scored.begin(), scored.end(), ranks_before);
  if (scored.size() > k) scored.resize(k);
  return scored;
}

}  // namespace simgrag
