#pragma once
// Differential checks on one instance: naive search against the brute-force
// oracle, optimized search against naive search, and retrieval on the
// direction-reversed graph. Shared by oracle-check and the test suites.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "simgrag/embedding.hpp"
#include "simgrag/gsd.hpp"
#include "simgrag/kg_store.hpp"
#include "simgrag/pattern.hpp"
#include "simgrag/retrieval.hpp"
#include "simgrag/synthetic.hpp"

namespace simgrag {

inline constexpr double kGsdTolerance = 1e-9;

// Empty when equal: same length, same mappings, GSDs within kGsdTolerance.
std::string compare_results(const std::vector<ScoredSubgraph>& expected, const std::vector<ScoredSubgraph>& actual);

// Same triples (and entity ids) with head and tail swapped.
KnowledgeGraph reverse_graph(const KnowledgeGraph& g);

struct DifferentialOptions {
  std::size_t k = 3;
  std::size_t dim = 64;
  std::uint64_t embedding_seed = 0;
  std::vector<std::size_t> restricted_counts = {2, 4, 16};  // k_n = k_r values
  bool check_direction = true;
};

struct ConfigOutcome {
  std::string label;  // "full" or "kn=2,kr=4" ...
  std::uint64_t explored_naive = 0;
  std::uint64_t explored_optimized = 0;
  bool queue_filled = false;
};

struct DifferentialOutcome {
  std::uint64_t seed = 0;
  ShapeKind shape = ShapeKind::kOneHop;
  std::vector<std::string> failures;  // empty on success
  std::vector<ConfigOutcome> configs;
  std::size_t results = 0;  // size of the full-candidate result

  bool ok() const { return failures.empty(); }
};

DifferentialOutcome check_instance(const RandomInstance& inst, const DifferentialOptions& options = {});

// Indexes over a graph's labels with the given provider, no cache.
struct GraphIndexes {
  VectorIndex nodes;
  VectorIndex relations;
};
GraphIndexes index_graph(const KnowledgeGraph& g, const EmbeddingProvider& provider);

}  // namespace simgrag
