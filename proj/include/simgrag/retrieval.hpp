#pragma once
// Top-k isomorphic subgraph retrieval by Graph Semantic Distance.
//
// Filtering: each Known pattern node (relation) keeps its k_n (k_r) nearest
// KG entities (relations); Unknown terms accept everything at distance 0, or
// the members of the k_t nearest entity types when a type map is loaded.
// Ordering: the start node has the fewest candidates and pattern triples are
// listed in DFS order from it. Enumeration: each start candidate is expanded
// triple by triple over the undirected adjacency.
//
// The optimized search adds two things on top of the same enumeration: a
// lower bound B (mapped distance so far plus the minimum candidate distance
// of every unmapped node and unmatched triple) that discards a branch once B
// exceeds the current k-th best GSD, and a greedy order that tries start
// candidates and neighbor expansions by ascending distance.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "simgrag/embedding.hpp"
#include "simgrag/gsd.hpp"
#include "simgrag/kg_store.hpp"
#include "simgrag/pattern.hpp"

namespace simgrag {

enum class TieBreak {
  // Equal GSD ordered by the ascending tuple of assigned KG triple indices.
  kSortedTripleIndices,
};

struct RetrievalConfig {
  std::size_t k = 3;
  std::size_t k_n = 16;
  std::size_t k_r = 16;
  std::size_t k_t = 16;
  bool enable_pruning = true;
  bool enable_greedy = true;
  // Keep one mapping per distinct KG triple set (automorphic duplicates of
  // the pattern collapse to their best-ranked mapping).
  bool dedup_automorphisms = true;
  TieBreak tie_break = TieBreak::kSortedTripleIndices;

  // Throws std::invalid_argument when a count is zero.
  void validate() const;
};

class NodeCandidates {
 public:
  enum class Kind { kRanked, kTyped, kAll };

  static NodeCandidates ranked(std::vector<Neighbor> nearest);
  static NodeCandidates typed(std::vector<EntityId> members);
  static NodeCandidates all(std::size_t num_entities);

  Kind kind() const { return kind_; }
  std::size_t size() const;
  double min_distance() const { return min_distance_; }
  // Distance of `e` when it is a candidate.
  std::optional<double> distance(EntityId e) const;
  // Candidates in ascending (distance, id) order.
  template <typename F>
  void for_each_by_distance(F&& f) const;
  // Candidates in ascending id order.
  template <typename F>
  void for_each_by_id(F&& f) const;

 private:
  Kind kind_ = Kind::kAll;
  std::size_t universe_ = 0;
  double min_distance_ = 0.0;
  std::vector<Neighbor> ranked_;                   // kRanked, by distance
  std::unordered_map<std::uint32_t, double> lookup_;  // kRanked
  std::vector<EntityId> members_;                  // kTyped, ascending
};

class RelationCandidates {
 public:
  static RelationCandidates ranked(std::vector<Neighbor> nearest, std::size_t num_relations);
  static RelationCandidates all(std::size_t num_relations);

  bool accepts_all() const { return all_; }
  std::size_t size() const { return all_ ? universe_ : ranked_.size(); }
  double min_distance() const { return min_distance_; }
  std::optional<double> distance(RelationId r) const {
    if (all_) return 0.0;
    if (r.value >= by_relation_.size()) return std::nullopt;
    const double d = by_relation_[r.value];
    if (d < 0.0) return std::nullopt;
    return d;
  }
  const std::vector<Neighbor>& nearest() const { return ranked_; }

 private:
  bool all_ = true;
  std::size_t universe_ = 0;
  double min_distance_ = 0.0;
  std::vector<Neighbor> ranked_;
  std::vector<double> by_relation_;  // -1 for non-candidates
};

struct CandidateSets {
  std::vector<NodeCandidates> nodes;         // per pattern node
  std::vector<RelationCandidates> relations; // per pattern triple
  // Known terms that ended up with no candidates; retrieval returns nothing.
  std::vector<std::string> empty_terms;

  bool ok() const { return empty_terms.empty(); }
};

// `type_index` rows must follow g.type_labels() ids; pass nullptr to ignore
// type hints.
CandidateSets build_candidates(const PatternGraph& p, const PatternVectors& pv, const KnowledgeGraph& g,
                               const VectorIndex& node_index, const VectorIndex& rel_index,
                               const VectorIndex* type_index, const RetrievalConfig& cfg);

// Candidate sets that admit every entity and relation, each at its true
// embedding distance. Used for oracle comparisons.
CandidateSets full_candidates(const PatternGraph& p, const PatternVectors& pv, const KnowledgeGraph& g,
                              const VectorIndex& node_index, const VectorIndex& rel_index);

struct SearchStep {
  std::size_t triple;   // pattern triple index
  std::size_t anchor;   // pattern node already mapped when the step runs
  std::size_t other;    // the triple's other endpoint
  bool other_is_new;    // false when the step closes a cycle
};

struct SearchPlan {
  std::size_t start_node = 0;
  std::vector<SearchStep> steps;  // the ordered triple list L
  // remaining_minima[i]: minimum candidate distances of every node unmapped
  // and every triple unmatched after i steps (X_i + Y_i).
  std::vector<double> remaining_minima;
  // Bound before the start node is mapped: all node and triple minima.
  double empty_bound = 0.0;

  std::vector<std::size_t> order() const;
};

SearchPlan order_triples(const PatternGraph& p, const CandidateSets& cands);

// A partial mapping after `matched` steps of a plan. Unmapped nodes hold
// kUnmapped; unmatched triples hold kUnassigned.
struct SearchState {
  static constexpr EntityId kUnmapped{std::numeric_limits<std::uint32_t>::max()};
  static constexpr TripleIndex kUnassigned = std::numeric_limits<TripleIndex>::max();

  IsoMapping partial;
  std::size_t matched = 0;
  bool started = false;
  double mapped_distance = 0.0;  // distances of mapped nodes and matched triples
};

// Accumulated mapped distance recomputed from a partial mapping's candidate
// distances (in plan order, as the search accumulates it).
double mapped_distance(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands,
                       const SearchPlan& plan, const IsoMapping& partial, std::size_t matched);

double lower_bound(const SearchPlan& plan, const SearchState& state);

struct SearchStats {
  std::uint64_t explored = 0;   // Expand calls entered
  std::uint64_t pruned = 0;     // branches discarded by the bound
  std::uint64_t completed = 0;  // complete mappings offered to the queue
  // Explored count when the queue first held k results / the first prune
  // fired; 0 when it never happened.
  std::uint64_t explored_at_first_full = 0;
  std::uint64_t explored_at_first_prune = 0;
};

struct RetrievalResult {
  std::vector<ScoredSubgraph> subgraphs;  // ascending by ranks_before
  SearchStats stats;
};

// Bounded best-k container under ranks_before, optionally one entry per
// triple set.
class TopKQueue {
 public:
  TopKQueue(std::size_t k, bool dedup);

  void offer(ScoredSubgraph s);
  bool full() const { return entries_.size() >= k_; }
  // GSD of the current k-th entry; +inf until full.
  double threshold() const;
  std::vector<ScoredSubgraph> sorted() const;

 private:
  struct Less {
    bool operator()(const ScoredSubgraph& a, const ScoredSubgraph& b) const { return ranks_before(a, b); }
  };
  std::size_t k_;
  bool dedup_;
  std::set<ScoredSubgraph, Less> entries_;
  std::map<std::vector<TripleIndex>, std::set<ScoredSubgraph, Less>::iterator> by_key_;
};

// Plain enumeration: start candidates by id, neighbors in adjacency order, no
// pruning.
RetrievalResult retrieve_topk_naive(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands,
                                    const RetrievalConfig& cfg);

// Same result sequence as the naive search; pruning and greedy ordering are
// controlled by cfg.enable_pruning / cfg.enable_greedy.
RetrievalResult retrieve_topk_optimized(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands,
                                        const RetrievalConfig& cfg);

template <typename F>
void NodeCandidates::for_each_by_distance(F&& f) const {
  switch (kind_) {
    case Kind::kRanked:
      for (const auto& n : ranked_) f(EntityId{n.id}, n.distance);
      break;
    case Kind::kTyped:
      for (const auto e : members_) f(e, 0.0);
      break;
    case Kind::kAll:
      for (std::uint32_t i = 0; i < universe_; ++i) f(EntityId{i}, 0.0);
      break;
  }
}

template <typename F>
void NodeCandidates::for_each_by_id(F&& f) const {
  if (kind_ != Kind::kRanked) {
    for_each_by_distance(f);
    return;
  }
  std::vector<Neighbor> by_id = ranked_;
  std::sort(by_id.begin(), by_id.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
  for (const auto& n : by_id) f(EntityId{n.id}, n.distance);
}

}  // namespace simgrag
