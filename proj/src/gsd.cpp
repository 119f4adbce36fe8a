#include "simgrag/gsd.hpp"

#include <algorithm>
#include <unordered_set>

namespace simgrag {

std::vector<TripleIndex> ScoredSubgraph::triple_key() const {
  auto key = mapping.edge_map;
  std::sort(key.begin(), key.end());
  return key;
}

bool ranks_before(const ScoredSubgraph& a, const ScoredSubgraph& b) {
  if (a.gsd != b.gsd) return a.gsd < b.gsd;
  const auto ka = a.triple_key();
  const auto kb = b.triple_key();
  if (ka != kb) return ka < kb;
  if (a.mapping.node_map != b.mapping.node_map) return a.mapping.node_map < b.mapping.node_map;
  return a.mapping.edge_map < b.mapping.edge_map;
}

PatternVectors embed_pattern(const PatternGraph& p, const EmbeddingProvider& provider,
                             const LabelNormalizer& normalizer, bool with_type_hints) {
  // Batch every needed text into a single provider call.
  std::vector<std::string> texts;
  const auto request = [&](const std::string& text) {
    texts.push_back(normalizer(text));
    return texts.size() - 1;
  };
  std::vector<std::optional<std::size_t>> node_slots(p.num_nodes());
  std::vector<std::optional<std::size_t>> rel_slots(p.num_triples());
  std::vector<std::optional<std::size_t>> hint_slots(p.num_nodes());
  for (std::size_t v = 0; v < p.num_nodes(); ++v) {
    const auto& term = p.nodes()[v];
    if (term.is_known()) {
      node_slots[v] = request(term.text());
    } else if (with_type_hints) {
      if (auto hint = term.type_hint(); !hint.empty()) hint_slots[v] = request(hint);
    }
  }
  for (std::size_t i = 0; i < p.num_triples(); ++i) {
    if (p.triples()[i].relation.is_known()) rel_slots[i] = request(p.triples()[i].relation.text());
  }

  std::vector<EmbeddingVector> vectors;
  if (!texts.empty()) vectors = provider.embed(texts);
  if (vectors.size() != texts.size()) throw EmbeddingError("provider returned wrong number of vectors");

  PatternVectors pv;
  const auto fill = [&](const auto& slots, auto& out) {
    out.resize(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i]) out[i] = vectors[*slots[i]];
    }
  };
  fill(node_slots, pv.nodes);
  fill(rel_slots, pv.relations);
  fill(hint_slots, pv.type_hints);
  return pv;
}

bool is_valid_mapping(const PatternGraph& p, const KnowledgeGraph& g, const IsoMapping& m) {
  if (m.node_map.size() != p.num_nodes() || m.edge_map.size() != p.num_triples()) return false;
  std::unordered_set<EntityId> entities;
  for (const auto e : m.node_map) {
    if (e.value >= g.num_entities() || !entities.insert(e).second) return false;
  }
  std::unordered_set<TripleIndex> used;
  for (std::size_t i = 0; i < p.num_triples(); ++i) {
    const auto ti = m.edge_map[i];
    if (ti >= g.num_triples() || !used.insert(ti).second) return false;
    const auto& t = g.triples()[ti];
    const auto h = m.node_map[p.head_node(i)];
    const auto tl = m.node_map[p.tail_node(i)];
    const bool forward = t.head == h && t.tail == tl;
    const bool backward = t.head == tl && t.tail == h;
    if (!forward && !backward) return false;
  }
  return true;
}

double compute_gsd(const PatternGraph& p, const KnowledgeGraph& g, const IsoMapping& m, const PatternVectors& pv,
                   const VectorIndex& node_index, const VectorIndex& rel_index) {
  double total = 0.0;
  for (std::size_t v = 0; v < p.num_nodes(); ++v) {
    if (p.nodes()[v].is_unknown()) continue;
    if (v >= pv.nodes.size() || !pv.nodes[v]) {
      throw EmbeddingError("missing embedding for pattern node '" + p.nodes()[v].text() + "'");
    }
    total += node_index.distance(*pv.nodes[v], m.node_map[v].value);
  }
  for (std::size_t i = 0; i < p.num_triples(); ++i) {
    if (p.triples()[i].relation.is_unknown()) continue;
    if (i >= pv.relations.size() || !pv.relations[i]) {
      throw EmbeddingError("missing embedding for pattern relation '" + p.triples()[i].relation.text() + "'");
    }
    total += rel_index.distance(*pv.relations[i], g.triples()[m.edge_map[i]].relation.value);
  }
  return total;
}

std::string verbalize_subgraph(const ScoredSubgraph& s, const KnowledgeGraph& g, QuoteStyle style) {
  std::string out;
  for (std::size_t i = 0; i < s.mapping.edge_map.size(); ++i) {
    const auto& t = g.triples()[s.mapping.edge_map[i]];
    if (i > 0) out += '\n';
    out += format_triple(g.entity_label(t.head), g.relation_label(t.relation), g.entity_label(t.tail), style);
  }
  return out;
}

}  // namespace simgrag
