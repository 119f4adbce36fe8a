#pragma once
// Seeded random knowledge graphs and patterns for differential testing and
// benchmarks. Patterns are sampled from subgraphs that really occur in the KG
// and then perturbed (label noise, flipped directions, Unknown terms), so
// retrieval has both exact and near matches to rank.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "simgrag/kg_store.hpp"
#include "simgrag/pattern.hpp"

namespace simgrag {

struct RandomGraphOptions {
  std::size_t nodes = 50;
  std::size_t edges = 100;
  std::size_t relations = 8;
};

// Entity labels are "<word> <word> <n>", relation labels "<word> <word>".
// Self-loops are never generated; duplicate triples are redrawn.
KnowledgeGraph random_graph(std::mt19937_64& rng, const RandomGraphOptions& options);

enum class ShapeKind {
  kOneHop,
  kTwoHopPath,
  kThreeHopPath,
  kTwoHopConjunction,
  kThreeHopConjunction,
  kThreeHopStar,
  kFourHopPath,  // longest chain used by the random suites
  kTriangle,     // cycle; exercises cycle-closing steps
};

inline constexpr ShapeKind kSixShapes[] = {ShapeKind::kOneHop,           ShapeKind::kTwoHopPath,
                                           ShapeKind::kThreeHopPath,     ShapeKind::kTwoHopConjunction,
                                           ShapeKind::kThreeHopConjunction, ShapeKind::kThreeHopStar};

std::string_view to_string(ShapeKind shape);

struct RandomPatternOptions {
  std::size_t unknown_terms = 0;     // nodes or relations replaced by UNKNOWN
  double label_noise = 0.5;          // chance a Known label gets one word swapped
  double flip_direction = 0.3;       // chance a pattern triple is reversed
  std::size_t max_attempts = 64;     // tries to find a real occurrence
};

// Conjunction shapes put their Unknown budget on interior nodes first so the
// Known/Unknown layout matches the shape name.
PatternGraph random_pattern(std::mt19937_64& rng, const KnowledgeGraph& g, ShapeKind shape,
                            const RandomPatternOptions& options);

struct RandomInstance {
  std::uint64_t seed;
  ShapeKind shape;
  KnowledgeGraph graph;
  PatternGraph pattern;
};

struct InstanceOptions {
  std::size_t min_nodes = 20;
  std::size_t max_nodes = 200;
  double min_edge_factor = 1.5;
  double max_edge_factor = 3.0;
  std::size_t min_relations = 3;
  std::size_t max_relations = 12;
  bool include_extra_shapes = true;  // four-hop path and triangle besides the six
};

// Benchmark workload: alternating 2-hop paths (Known subject, Unknown middle
// and far end) and 2-hop conjunctions (Known ends, Unknown middle), sampled
// from real occurrences with label noise.
std::vector<PatternGraph> two_hop_patterns(std::mt19937_64& rng, const KnowledgeGraph& g, std::size_t count);

RandomInstance random_instance(std::uint64_t seed, const InstanceOptions& options = {});

}  // namespace simgrag
