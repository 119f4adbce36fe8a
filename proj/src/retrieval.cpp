#include "simgrag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simgrag {

namespace {

// B and the final GSD are summed in different orders; a branch is only
// discarded when B clears the threshold by more than rounding noise.
double prune_slack(double threshold) { return 1e-9 * std::max(1.0, std::abs(threshold)); }

class Searcher {
 public:
  Searcher(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& c, const SearchPlan& plan,
           const RetrievalConfig& cfg, bool prune, bool greedy)
      : p_(p),
        g_(g),
        c_(c),
        plan_(plan),
        prune_(prune),
        greedy_(greedy),
        queue_(cfg.k, cfg.dedup_automorphisms),
        node_map_(p.num_nodes(), SearchState::kUnmapped),
        edge_map_(p.num_triples(), SearchState::kUnassigned),
        buffers_(plan.steps.size()) {}

  RetrievalResult run() {
    const auto& start = c_.nodes[plan_.start_node];
    std::vector<std::pair<EntityId, double>> starts;
    starts.reserve(start.size());
    const auto collect = [&](EntityId e, double d) { starts.emplace_back(e, d); };
    if (greedy_) start.for_each_by_distance(collect);
    else start.for_each_by_id(collect);

    for (std::size_t idx = 0; idx < starts.size(); ++idx) {
      const auto [e, d] = starts[idx];
      if (should_prune(d + plan_.remaining_minima[0])) {
        if (greedy_) {
          stats_.pruned += starts.size() - idx;
          break;
        }
        ++stats_.pruned;
        continue;
      }
      node_map_[plan_.start_node] = e;
      expand(0, d);
      node_map_[plan_.start_node] = SearchState::kUnmapped;
    }
    return {queue_.sorted(), stats_};
  }

 private:
  struct Child {
    EntityId node;
    TripleIndex triple;
    double cost;
  };

  bool should_prune(double bound) {
    if (!prune_ || !queue_.full()) return false;
    const double t = queue_.threshold();
    if (bound > t + prune_slack(t)) {
      if (stats_.explored_at_first_prune == 0) stats_.explored_at_first_prune = stats_.explored;
      return true;
    }
    return false;
  }

  // Stable. Child lists are usually short, and stable_sort allocates a buffer
  // per call, which dominates microsecond-scale searches.
  static void sort_by_cost(std::vector<Child>& v) {
    if (v.size() > 32) {
      std::stable_sort(v.begin(), v.end(), [](const Child& a, const Child& b) { return a.cost < b.cost; });
      return;
    }
    for (std::size_t i = 1; i < v.size(); ++i) {
      const Child c = v[i];
      std::size_t j = i;
      for (; j > 0 && c.cost < v[j - 1].cost; --j) v[j] = v[j - 1];
      v[j] = c;
    }
  }

  bool entity_used(EntityId e) const {
    return std::find(node_map_.begin(), node_map_.end(), e) != node_map_.end();
  }
  bool triple_used(TripleIndex t) const {
    return std::find(edge_map_.begin(), edge_map_.end(), t) != edge_map_.end();
  }

  void expand(std::size_t i, double mapped) {
    ++stats_.explored;
    if (i == plan_.steps.size()) {
      complete();
      return;
    }
    const auto& step = plan_.steps[i];
    const EntityId anchor = node_map_[step.anchor];
    const auto& rel_cands = c_.relations[step.triple];
    const auto& node_cands = c_.nodes[step.other];
    const EntityId fixed_other = step.other_is_new ? SearchState::kUnmapped : node_map_[step.other];

    auto& children = buffers_[i];
    children.clear();
    for (const auto& entry : g_.neighbors(anchor)) {
      const auto rd = rel_cands.distance(entry.relation);
      if (!rd) continue;
      double nd = 0.0;
      if (step.other_is_new) {
        const auto d = node_cands.distance(entry.neighbor);
        if (!d || entity_used(entry.neighbor)) continue;
        nd = *d;
      } else if (entry.neighbor != fixed_other) {
        continue;
      }
      if (triple_used(entry.triple)) continue;
      children.push_back({entry.neighbor, entry.triple, *rd + nd});
    }
    if (greedy_) sort_by_cost(children);

    // Index-based: deeper calls reuse other buffers, never this one.
    for (std::size_t idx = 0; idx < children.size(); ++idx) {
      const Child child = children[idx];
      const double next = mapped + child.cost;
      if (should_prune(next + plan_.remaining_minima[i + 1])) {
        if (greedy_) {
          // Costs ascend, so every later sibling has a bound at least as large.
          stats_.pruned += children.size() - idx;
          break;
        }
        ++stats_.pruned;
        continue;
      }
      edge_map_[step.triple] = child.triple;
      if (step.other_is_new) node_map_[step.other] = child.node;
      expand(i + 1, next);
      if (step.other_is_new) node_map_[step.other] = SearchState::kUnmapped;
      edge_map_[step.triple] = SearchState::kUnassigned;
    }
  }

  void complete() {
    ScoredSubgraph s;
    s.mapping.node_map = node_map_;
    s.mapping.edge_map = edge_map_;
    // Same term order as compute_gsd so equal subgraphs get bit-identical GSDs.
    double gsd = 0.0;
    for (std::size_t v = 0; v < p_.num_nodes(); ++v) {
      if (p_.nodes()[v].is_known()) gsd += *c_.nodes[v].distance(node_map_[v]);
    }
    for (std::size_t t = 0; t < p_.num_triples(); ++t) {
      if (p_.triples()[t].relation.is_known()) {
        gsd += *c_.relations[t].distance(g_.triples()[edge_map_[t]].relation);
      }
    }
    s.gsd = gsd;
    ++stats_.completed;
    queue_.offer(std::move(s));
    if (stats_.explored_at_first_full == 0 && queue_.full()) stats_.explored_at_first_full = stats_.explored;
  }

  const PatternGraph& p_;
  const KnowledgeGraph& g_;
  const CandidateSets& c_;
  const SearchPlan& plan_;
  bool prune_;
  bool greedy_;
  TopKQueue queue_;
  SearchStats stats_;
  std::vector<EntityId> node_map_;
  std::vector<TripleIndex> edge_map_;
  std::vector<std::vector<Child>> buffers_;
};

RetrievalResult run_search(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands,
                           const RetrievalConfig& cfg, bool prune, bool greedy) {
  cfg.validate();
  if (cands.nodes.size() != p.num_nodes() || cands.relations.size() != p.num_triples()) {
    throw std::invalid_argument("candidate sets do not match the pattern");
  }
  if (!cands.ok()) return {};
  const auto plan = order_triples(p, cands);
  return Searcher(p, g, cands, plan, cfg, prune, greedy).run();
}

}  // namespace

void RetrievalConfig::validate() const {
  if (k == 0 || k_n == 0 || k_r == 0 || k_t == 0) {
    throw std::invalid_argument("retrieval counts k, k_n, k_r, k_t must all be at least 1");
  }
}

NodeCandidates NodeCandidates::ranked(std::vector<Neighbor> nearest) {
  NodeCandidates c;
  c.kind_ = Kind::kRanked;
  std::sort(nearest.begin(), nearest.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  c.ranked_ = std::move(nearest);
  c.lookup_.reserve(c.ranked_.size());
  for (const auto& n : c.ranked_) c.lookup_.emplace(n.id, n.distance);
  c.min_distance_ = c.ranked_.empty() ? std::numeric_limits<double>::infinity() : c.ranked_.front().distance;
  return c;
}

NodeCandidates NodeCandidates::typed(std::vector<EntityId> members) {
  NodeCandidates c;
  c.kind_ = Kind::kTyped;
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  c.members_ = std::move(members);
  return c;
}

NodeCandidates NodeCandidates::all(std::size_t num_entities) {
  NodeCandidates c;
  c.kind_ = Kind::kAll;
  c.universe_ = num_entities;
  return c;
}

std::size_t NodeCandidates::size() const {
  switch (kind_) {
    case Kind::kRanked: return ranked_.size();
    case Kind::kTyped: return members_.size();
    case Kind::kAll: return universe_;
  }
  return 0;
}

std::optional<double> NodeCandidates::distance(EntityId e) const {
  switch (kind_) {
    case Kind::kRanked: {
      auto it = lookup_.find(e.value);
      if (it == lookup_.end()) return std::nullopt;
      return it->second;
    }
    case Kind::kTyped:
      if (std::binary_search(members_.begin(), members_.end(), e)) return 0.0;
      return std::nullopt;
    case Kind::kAll:
      if (e.value < universe_) return 0.0;
      return std::nullopt;
  }
  return std::nullopt;
}

RelationCandidates RelationCandidates::ranked(std::vector<Neighbor> nearest, std::size_t num_relations) {
  RelationCandidates c;
  c.all_ = false;
  c.universe_ = num_relations;
  std::sort(nearest.begin(), nearest.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  c.ranked_ = std::move(nearest);
  c.by_relation_.assign(num_relations, -1.0);
  for (const auto& n : c.ranked_) {
    if (n.id >= num_relations) throw std::out_of_range("relation candidate id out of range");
    c.by_relation_[n.id] = n.distance;
  }
  c.min_distance_ = c.ranked_.empty() ? std::numeric_limits<double>::infinity() : c.ranked_.front().distance;
  return c;
}

RelationCandidates RelationCandidates::all(std::size_t num_relations) {
  RelationCandidates c;
  c.all_ = true;
  c.universe_ = num_relations;
  return c;
}

CandidateSets build_candidates(const PatternGraph& p, const PatternVectors& pv, const KnowledgeGraph& g,
                               const VectorIndex& node_index, const VectorIndex& rel_index,
                               const VectorIndex* type_index, const RetrievalConfig& cfg) {
  cfg.validate();
  if (node_index.size() != g.num_entities() || rel_index.size() != g.num_relations()) {
    throw std::invalid_argument("embedding indexes do not cover the knowledge graph labels");
  }
  const bool use_types = type_index != nullptr && g.has_type_map();
  if (use_types && type_index->size() != g.type_labels().size()) {
    throw std::invalid_argument("type index does not cover the type labels");
  }

  CandidateSets c;
  for (std::size_t v = 0; v < p.num_nodes(); ++v) {
    const auto& term = p.nodes()[v];
    if (term.is_known()) {
      if (v >= pv.nodes.size() || !pv.nodes[v]) throw EmbeddingError("missing embedding for '" + term.text() + "'");
      auto nearest = g.num_entities() == 0 ? std::vector<Neighbor>{} : node_index.top_k(*pv.nodes[v], cfg.k_n);
      if (nearest.empty()) c.empty_terms.push_back(term.text());
      c.nodes.push_back(NodeCandidates::ranked(std::move(nearest)));
    } else if (use_types && v < pv.type_hints.size() && pv.type_hints[v]) {
      std::vector<EntityId> members;
      for (const auto& t : type_index->top_k(*pv.type_hints[v], cfg.k_t)) {
        const auto of_type = g.entities_of_type(t.id);
        members.insert(members.end(), of_type.begin(), of_type.end());
      }
      c.nodes.push_back(members.empty() ? NodeCandidates::all(g.num_entities())
                                        : NodeCandidates::typed(std::move(members)));
    } else {
      c.nodes.push_back(NodeCandidates::all(g.num_entities()));
    }
  }
  for (std::size_t i = 0; i < p.num_triples(); ++i) {
    const auto& t = p.triples()[i];
    if (t.relation.is_known()) {
      if (i >= pv.relations.size() || !pv.relations[i]) {
        throw EmbeddingError("missing embedding for '" + t.relation.text() + "'");
      }
      auto nearest = g.num_relations() == 0 ? std::vector<Neighbor>{} : rel_index.top_k(*pv.relations[i], cfg.k_r);
      if (nearest.empty()) c.empty_terms.push_back(t.relation.text());
      c.relations.push_back(RelationCandidates::ranked(std::move(nearest), g.num_relations()));
    } else {
      c.relations.push_back(RelationCandidates::all(g.num_relations()));
    }
  }
  return c;
}

CandidateSets full_candidates(const PatternGraph& p, const PatternVectors& pv, const KnowledgeGraph& g,
                              const VectorIndex& node_index, const VectorIndex& rel_index) {
  RetrievalConfig cfg;
  cfg.k_n = std::max<std::size_t>(g.num_entities(), 1);
  cfg.k_r = std::max<std::size_t>(g.num_relations(), 1);
  return build_candidates(p, pv, g, node_index, rel_index, nullptr, cfg);
}

std::vector<std::size_t> SearchPlan::order() const {
  std::vector<std::size_t> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.triple);
  return out;
}

SearchPlan order_triples(const PatternGraph& p, const CandidateSets& cands) {
  SearchPlan plan;
  for (std::size_t v = 1; v < p.num_nodes(); ++v) {
    const auto size_v = cands.nodes[v].size();
    const auto size_best = cands.nodes[plan.start_node].size();
    if (size_v < size_best || (size_v == size_best && p.nodes()[v].text() < p.nodes()[plan.start_node].text())) {
      plan.start_node = v;
    }
  }

  std::vector<bool> visited(p.num_nodes(), false);
  std::vector<bool> listed(p.num_triples(), false);
  const auto visit = [&](const auto& self, std::size_t u) -> void {
    for (const auto t : p.incident(u)) {
      if (listed[t]) continue;
      listed[t] = true;
      const auto w = p.head_node(t) == u ? p.tail_node(t) : p.head_node(t);
      const bool fresh = !visited[w];
      plan.steps.push_back({t, u, w, fresh});
      if (fresh) {
        visited[w] = true;
        self(self, w);
      }
    }
  };
  visited[plan.start_node] = true;
  visit(visit, plan.start_node);

  const auto m = plan.steps.size();
  std::vector<double> node_min(p.num_nodes());
  for (std::size_t v = 0; v < p.num_nodes(); ++v) node_min[v] = cands.nodes[v].min_distance();

  std::vector<bool> mapped(p.num_nodes(), false);
  mapped[plan.start_node] = true;
  plan.remaining_minima.assign(m + 1, 0.0);
  for (std::size_t i = 0; i <= m; ++i) {
    if (i > 0 && plan.steps[i - 1].other_is_new) mapped[plan.steps[i - 1].other] = true;
    double x = 0.0;
    for (std::size_t v = 0; v < p.num_nodes(); ++v) {
      if (!mapped[v]) x += node_min[v];
    }
    double y = 0.0;
    for (std::size_t j = i; j < m; ++j) y += cands.relations[plan.steps[j].triple].min_distance();
    plan.remaining_minima[i] = x + y;
  }
  double all = 0.0;
  for (const auto d : node_min) all += d;
  for (std::size_t t = 0; t < p.num_triples(); ++t) all += cands.relations[t].min_distance();
  plan.empty_bound = all;
  return plan;
}

double mapped_distance(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands,
                       const SearchPlan& plan, const IsoMapping& partial, std::size_t matched) {
  const auto start = partial.node_map.at(plan.start_node);
  double total = *cands.nodes[plan.start_node].distance(start);
  for (std::size_t i = 0; i < matched; ++i) {
    const auto& step = plan.steps.at(i);
    const auto& t = g.triples()[partial.edge_map.at(step.triple)];
    double cost = *cands.relations[step.triple].distance(t.relation);
    if (step.other_is_new) cost += *cands.nodes[step.other].distance(partial.node_map.at(step.other));
    total += cost;
  }
  (void)p;
  return total;
}

double lower_bound(const SearchPlan& plan, const SearchState& state) {
  if (!state.started) return state.mapped_distance + plan.empty_bound;
  return state.mapped_distance + plan.remaining_minima.at(state.matched);
}

TopKQueue::TopKQueue(std::size_t k, bool dedup) : k_(k), dedup_(dedup) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
}

void TopKQueue::offer(ScoredSubgraph s) {
  std::vector<TripleIndex> key;
  if (dedup_) {
    key = s.triple_key();
    if (auto it = by_key_.find(key); it != by_key_.end()) {
      if (!ranks_before(s, *it->second)) return;
      entries_.erase(it->second);
      it->second = entries_.insert(std::move(s)).first;
      return;
    }
  }
  if (full() && !ranks_before(s, *std::prev(entries_.end()))) return;
  auto pos = entries_.insert(std::move(s)).first;
  if (dedup_) by_key_.emplace(std::move(key), pos);
  if (entries_.size() > k_) {
    auto last = std::prev(entries_.end());
    if (dedup_) by_key_.erase(last->triple_key());
    entries_.erase(last);
  }
}

double TopKQueue::threshold() const {
  if (!full()) return std::numeric_limits<double>::infinity();
  return std::prev(entries_.end())->gsd;
}

std::vector<ScoredSubgraph> TopKQueue::sorted() const { return {entries_.begin(), entries_.end()}; }

RetrievalResult retrieve_topk_naive(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands,
                                    const RetrievalConfig& cfg) {
  return run_search(p, g, cands, cfg, false, false);
}

RetrievalResult retrieve_topk_optimized(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands,
                                        const RetrievalConfig& cfg) {
  return run_search(p, g, cands, cfg, cfg.enable_pruning, cfg.enable_greedy);
}

}  // namespace simgrag
