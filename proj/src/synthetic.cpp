#include "simgrag/synthetic.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

namespace simgrag {

namespace {

constexpr std::array<std::string_view, 48> kWords = {
    "amber",  "falcon", "river",  "stone",   "violet", "harbor", "quiet",  "north",  "silver", "garden",
    "ember",  "lantern", "meadow", "copper", "winter", "orchid", "signal", "velvet", "granite", "echo",
    "summit", "cedar",  "marble", "thunder", "willow", "crimson", "atlas", "beacon", "canyon", "delta",
    "fable",  "glacier", "hollow", "iris",   "juniper", "kestrel", "lumen", "mosaic", "nimbus", "opal",
    "prism",  "quartz", "raven",  "saffron", "tundra", "umber",  "vertex", "zephyr"};

std::string_view word(std::mt19937_64& rng) {
  return kWords[std::uniform_int_distribution<std::size_t>(0, kWords.size() - 1)(rng)];
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

struct Shape {
  std::size_t nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // each edge touches an earlier node
  std::vector<std::size_t> unknown_first;                   // preferred Unknown nodes
};

Shape shape_of(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kOneHop: return {2, {{0, 1}}, {1}};
    case ShapeKind::kTwoHopPath: return {3, {{0, 1}, {1, 2}}, {2, 1}};
    case ShapeKind::kThreeHopPath: return {4, {{0, 1}, {1, 2}, {2, 3}}, {3}};
    case ShapeKind::kTwoHopConjunction: return {3, {{0, 1}, {1, 2}}, {1}};
    case ShapeKind::kThreeHopConjunction: return {4, {{0, 1}, {1, 2}, {2, 3}}, {1, 2}};
    case ShapeKind::kThreeHopStar: return {4, {{0, 1}, {0, 2}, {0, 3}}, {0}};
    case ShapeKind::kFourHopPath: return {5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {4}};
    case ShapeKind::kTriangle: return {3, {{0, 1}, {1, 2}, {2, 0}}, {2}};
  }
  return {2, {{0, 1}}, {1}};
}

// Swaps one word of a label for a random vocabulary word.
std::string perturb(std::mt19937_64& rng, const std::string& label) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= label.size()) {
    const auto sp = label.find(' ', pos);
    parts.push_back(label.substr(pos, sp == std::string::npos ? std::string::npos : sp - pos));
    if (sp == std::string::npos) break;
    pos = sp + 1;
  }
  parts[uniform(rng, 0, parts.size() - 1)] = std::string(word(rng));
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out += " " + parts[i];
  return out;
}

// Random occurrence of the shape in g: entity per node, triple per edge.
bool embed_shape(std::mt19937_64& rng, const KnowledgeGraph& g, const Shape& shape, std::vector<EntityId>& nodes,
                 std::vector<TripleIndex>& edges) {
  constexpr EntityId kNone{~0u};
  nodes.assign(shape.nodes, kNone);
  edges.clear();
  nodes[0] = EntityId{static_cast<std::uint32_t>(uniform(rng, 0, g.num_entities() - 1))};
  for (const auto& [a, b] : shape.edges) {
    const auto adj = g.neighbors(nodes[a]);
    std::vector<const AdjacencyEntry*> options;
    for (const auto& e : adj) {
      if (std::find(edges.begin(), edges.end(), e.triple) != edges.end()) continue;
      if (nodes[b] == kNone) {
        if (std::find(nodes.begin(), nodes.end(), e.neighbor) == nodes.end()) options.push_back(&e);
      } else if (e.neighbor == nodes[b]) {
        options.push_back(&e);
      }
    }
    if (options.empty()) return false;
    const auto* pick = options[uniform(rng, 0, options.size() - 1)];
    nodes[b] = pick->neighbor;
    edges.push_back(pick->triple);
  }
  return true;
}

}  // namespace

std::string_view to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::kOneHop: return "1-hop path";
    case ShapeKind::kTwoHopPath: return "2-hop path";
    case ShapeKind::kThreeHopPath: return "3-hop path";
    case ShapeKind::kTwoHopConjunction: return "2-hop conjunction";
    case ShapeKind::kThreeHopConjunction: return "3-hop conjunction";
    case ShapeKind::kThreeHopStar: return "3-hop star";
    case ShapeKind::kFourHopPath: return "4-hop path";
    case ShapeKind::kTriangle: return "triangle";
  }
  return "?";
}

KnowledgeGraph random_graph(std::mt19937_64& rng, const RandomGraphOptions& options) {
  if (options.nodes < 2 || options.relations == 0) throw std::invalid_argument("random_graph needs >= 2 nodes and a relation");
  GraphBuilder b;
  std::vector<std::string> entities;
  entities.reserve(options.nodes);
  for (std::size_t i = 0; i < options.nodes; ++i) {
    entities.push_back(std::string(word(rng)) + " " + std::string(word(rng)) + " " + std::to_string(i));
    b.add_entity(entities.back());
  }
  std::vector<std::string> relations;
  std::set<std::string> seen;
  while (relations.size() < options.relations) {
    auto label = std::string(word(rng)) + " " + std::string(word(rng));
    if (seen.size() >= kWords.size() * kWords.size() / 2) label += " " + std::to_string(relations.size());
    if (seen.insert(label).second) relations.push_back(std::move(label));
  }
  const std::size_t max_edges = options.nodes * (options.nodes - 1) * options.relations;
  const std::size_t target = std::min(options.edges, max_edges);
  std::size_t added = 0;
  while (added < target) {
    const auto h = uniform(rng, 0, options.nodes - 1);
    auto t = uniform(rng, 0, options.nodes - 2);
    if (t >= h) ++t;
    const auto r = uniform(rng, 0, options.relations - 1);
    if (b.add(entities[h], relations[r], entities[t])) ++added;
  }
  return std::move(b).finish();
}

PatternGraph random_pattern(std::mt19937_64& rng, const KnowledgeGraph& g, ShapeKind kind,
                            const RandomPatternOptions& options) {
  const auto shape = shape_of(kind);
  if (g.num_entities() < shape.nodes || g.num_triples() == 0) {
    throw std::invalid_argument("graph too small for a " + std::string(to_string(kind)) + " pattern");
  }
  std::vector<EntityId> nodes;
  std::vector<TripleIndex> edges;
  bool found = false;
  for (std::size_t attempt = 0; attempt < options.max_attempts && !found; ++attempt) {
    found = embed_shape(rng, g, shape, nodes, edges);
  }

  std::vector<std::string> node_labels(shape.nodes);
  std::vector<std::string> rel_labels(shape.edges.size());
  std::vector<bool> reversed(shape.edges.size(), false);
  if (found) {
    for (std::size_t i = 0; i < shape.edges.size(); ++i) {
      const auto& t = g.triples()[edges[i]];
      rel_labels[i] = g.relation_label(t.relation);
      // Keep the KG direction unless the flip fires.
      reversed[i] = (t.head != nodes[shape.edges[i].first]) != chance(rng, options.flip_direction);
    }
    for (std::size_t v = 0; v < shape.nodes; ++v) node_labels[v] = g.entity_label(nodes[v]);
  } else {
    // No occurrence: arbitrary distinct labels, retrieval may come back empty.
    std::vector<std::uint32_t> ids(g.num_entities());
    for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t v = 0; v < shape.nodes; ++v) node_labels[v] = g.entity_label(EntityId{ids[v]});
    for (auto& r : rel_labels) {
      r = g.relation_label(RelationId{static_cast<std::uint32_t>(uniform(rng, 0, g.num_relations() - 1))});
    }
  }

  for (auto& l : node_labels) {
    if (chance(rng, options.label_noise)) l = perturb(rng, l);
  }
  for (auto& l : rel_labels) {
    if (chance(rng, options.label_noise)) l = perturb(rng, l);
  }

  // Unknown terms: preferred nodes first, then the rest in random order.
  // Term ids: [0, nodes) are nodes, [nodes, nodes + edges) relations.
  std::vector<std::size_t> order;
  for (const auto v : shape.unknown_first) order.push_back(v);
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < shape.nodes + shape.edges.size(); ++i) {
    if (std::find(order.begin(), order.end(), i) == order.end()) rest.push_back(i);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  order.insert(order.end(), rest.begin(), rest.end());
  std::size_t unknown_nodes = 0;
  std::size_t unknown_rels = 0;
  for (std::size_t i = 0; i < std::min(options.unknown_terms, order.size()); ++i) {
    const auto term = order[i];
    if (term < shape.nodes) node_labels[term] = "UNKNOWN entity " + std::to_string(++unknown_nodes);
    else rel_labels[term - shape.nodes] = "UNKNOWN relation " + std::to_string(++unknown_rels);
  }

  // Label noise can collide two node labels, which would merge pattern nodes.
  for (std::size_t a = 0; a < shape.nodes; ++a) {
    for (std::size_t b = a + 1; b < shape.nodes; ++b) {
      if (node_labels[a] == node_labels[b]) node_labels[b] += " " + std::to_string(b);
    }
  }

  std::vector<PatternTriple> triples;
  for (std::size_t i = 0; i < shape.edges.size(); ++i) {
    auto [a, b] = shape.edges[i];
    if (reversed[i]) std::swap(a, b);
    triples.push_back({PatternTerm(node_labels[a]), PatternTerm(rel_labels[i]), PatternTerm(node_labels[b])});
  }
  return PatternGraph(std::move(triples));
}

std::vector<PatternGraph> two_hop_patterns(std::mt19937_64& rng, const KnowledgeGraph& g, std::size_t count) {
  std::vector<PatternGraph> out;
  RandomPatternOptions po;
  for (std::size_t i = 0; i < count; ++i) {
    const bool path = i % 2 == 0;
    po.unknown_terms = path ? 2 : 1;
    out.push_back(random_pattern(rng, g, path ? ShapeKind::kTwoHopPath : ShapeKind::kTwoHopConjunction, po));
  }
  return out;
}

RandomInstance random_instance(std::uint64_t seed, const InstanceOptions& options) {
  std::mt19937_64 rng(seed);
  const auto n = uniform(rng, options.min_nodes, options.max_nodes);
  const double factor = std::uniform_real_distribution<double>(options.min_edge_factor, options.max_edge_factor)(rng);
  const auto rels = uniform(rng, options.min_relations, options.max_relations);
  auto g = random_graph(rng, {n, static_cast<std::size_t>(factor * static_cast<double>(n)), rels});

  const std::size_t shapes = options.include_extra_shapes ? 8 : 6;
  const auto kind = static_cast<ShapeKind>(uniform(rng, 0, shapes - 1));
  RandomPatternOptions po;
  po.unknown_terms = uniform(rng, 0, 2);
  auto p = random_pattern(rng, g, kind, po);
  return RandomInstance{seed, kind, std::move(g), std::move(p)};
}

}  // namespace simgrag
