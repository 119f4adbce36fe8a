#pragma once
// Brute-force reference retrieval for tests and the oracle-check command.
// Mappings are enumerated node-first over every entity, with no candidate
// filtering, edge ordering or bounds.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "simgrag/embedding.hpp"
#include "simgrag/gsd.hpp"
#include "simgrag/kg_store.hpp"
#include "simgrag/pattern.hpp"

namespace simgrag {

class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleLimits {
  std::size_t max_entities = 500;
  std::size_t max_pattern_triples = 5;
};

// Every valid mapping exactly once. With `dedup`, one mapping per distinct
// KG triple set: the lexicographically smallest (node_map, edge_map).
std::vector<IsoMapping> enumerate_all_mappings(const PatternGraph& p, const KnowledgeGraph& g, bool dedup,
                                               const OracleLimits& limits = {});

// GSD of every mapping, best-ranked per triple set when `dedup`, sorted by
// ranks_before, first k.
std::vector<ScoredSubgraph> brute_force_topk(const PatternGraph& p, const KnowledgeGraph& g, const PatternVectors& pv,
                                             const VectorIndex& node_index, const VectorIndex& rel_index,
                                             std::size_t k, bool dedup, const OracleLimits& limits = {});

}  // namespace simgrag
