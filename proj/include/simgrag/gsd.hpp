#pragma once
// Isomorphic mappings from a pattern into the knowledge graph and their
// Graph Semantic Distance (GSD).

#include <optional>
#include <string>
#include <vector>

#include "simgrag/embedding.hpp"
#include "simgrag/kg_store.hpp"
#include "simgrag/pattern.hpp"

namespace simgrag {

// node_map[i] is the entity for pattern node i; edge_map[j] the KG triple
// assigned to pattern triple j.
struct IsoMapping {
  std::vector<EntityId> node_map;
  std::vector<TripleIndex> edge_map;

  auto operator<=>(const IsoMapping&) const = default;
};

struct ScoredSubgraph {
  IsoMapping mapping;
  double gsd = 0.0;

  // Assigned KG triple indices, ascending. Identifies the subgraph.
  std::vector<TripleIndex> triple_key() const;

  bool operator==(const ScoredSubgraph&) const = default;
};

// Result order shared by every retrieval path: GSD, then the sorted triple
// key, then node_map and edge_map so the order is total.
bool ranks_before(const ScoredSubgraph& a, const ScoredSubgraph& b);

// Embeddings of the pattern's Known terms. Unknown slots stay empty.
struct PatternVectors {
  std::vector<std::optional<EmbeddingVector>> nodes;      // per pattern node
  std::vector<std::optional<EmbeddingVector>> relations;  // per pattern triple
  std::vector<std::optional<EmbeddingVector>> type_hints; // per pattern node, Unknown with a hint only
};

PatternVectors embed_pattern(const PatternGraph& p, const EmbeddingProvider& provider,
                             const LabelNormalizer& normalizer = {}, bool with_type_hints = false);

// Injective node map, injective edge map, and every assigned KG triple joins
// the mapped endpoints of its pattern triple in either direction. Extra KG
// edges between mapped nodes are allowed.
bool is_valid_mapping(const PatternGraph& p, const KnowledgeGraph& g, const IsoMapping& m);

// Sum of L2 distances over Known nodes (pattern vs mapped entity) plus Known
// relations (pattern vs assigned triple's relation). Nodes are summed first in
// index order, then triples in index order.
double compute_gsd(const PatternGraph& p, const KnowledgeGraph& g, const IsoMapping& m, const PatternVectors& pv,
                   const VectorIndex& node_index, const VectorIndex& rel_index);

// One quoted (h, r, t) tuple per line in pattern-triple order, KG direction kept.
std::string verbalize_subgraph(const ScoredSubgraph& s, const KnowledgeGraph& g,
                               QuoteStyle style = QuoteStyle::kSingle);

}  // namespace simgrag
