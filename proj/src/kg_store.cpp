#include "simgrag/kg_store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace simgrag {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto begin = s.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(kSpace);
  return s.substr(begin, end - begin + 1);
}

// Splits on tabs; fields keep interior whitespace.
std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

std::uint32_t LabelTable::intern(std::string_view label) {
  if (auto it = index_.find(label); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> LabelTable::find(std::string_view label) const {
  if (auto it = index_.find(label); it != index_.end()) return it->second;
  return std::nullopt;
}

const std::string& LabelTable::label(std::uint32_t id) const {
  if (id >= labels_.size()) throw LookupError("label id " + std::to_string(id) + " out of range");
  return labels_[id];
}

const std::string& KnowledgeGraph::entity_label(EntityId id) const { return entities_.label(id.value); }

const std::string& KnowledgeGraph::relation_label(RelationId id) const {
  return relations_.label(id.value);
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view label) const {
  if (auto id = entities_.find(label)) return EntityId{*id};
  return std::nullopt;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view label) const {
  if (auto id = relations_.find(label)) return RelationId{*id};
  return std::nullopt;
}

std::span<const AdjacencyEntry> KnowledgeGraph::neighbors(EntityId v) const {
  if (v.value >= entities_.size()) {
    throw LookupError("entity id " + std::to_string(v.value) + " out of range");
  }
  const auto begin = offsets_[v.value];
  const auto end = offsets_[v.value + 1];
  return {adjacency_.data() + begin, end - begin};
}

EntityId KnowledgeGraph::intern_entity(std::string_view label) {
  const auto before = entities_.size();
  const EntityId id{entities_.intern(label)};
  if (entities_.size() != before) offsets_.push_back(offsets_.back());
  return id;
}

std::span<const EntityId> KnowledgeGraph::entities_of_type(std::string_view type) const {
  if (auto id = type_labels_.find(type)) return types_[*id];
  return {};
}

std::span<const EntityId> KnowledgeGraph::entities_of_type(std::uint32_t type_id) const {
  if (type_id >= types_.size()) throw LookupError("type id " + std::to_string(type_id) + " out of range");
  return types_[type_id];
}

bool GraphBuilder::add(std::string_view head, std::string_view relation, std::string_view tail) {
  Triple t{EntityId{graph_.entities_.intern(head)}, RelationId{graph_.relations_.intern(relation)},
           EntityId{graph_.entities_.intern(tail)}};
  const auto next = static_cast<TripleIndex>(graph_.triples_.size());
  if (!seen_.emplace(t, next).second) return false;
  graph_.triples_.push_back(t);
  return true;
}

EntityId GraphBuilder::add_entity(std::string_view label) { return EntityId{graph_.entities_.intern(label)}; }

KnowledgeGraph GraphBuilder::finish() && {
  KnowledgeGraph g = std::move(graph_);
  seen_.clear();
  const std::size_t n = g.entities_.size();
  std::vector<std::size_t> degree(n + 1, 0);
  for (const auto& t : g.triples_) {
    ++degree[t.head.value];
    ++degree[t.tail.value];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
  g.adjacency_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Triples are visited in index order, so each list ends up sorted by triple index.
  for (TripleIndex i = 0; i < g.triples_.size(); ++i) {
    const auto& t = g.triples_[i];
    g.adjacency_[cursor[t.head.value]++] = {t.relation, t.tail, i, Direction::kOutgoing};
    g.adjacency_[cursor[t.tail.value]++] = {t.relation, t.head, i, Direction::kIncoming};
  }
  return g;
}

KnowledgeGraph load_triples(std::istream& in) {
  GraphBuilder builder;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (is_blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    const auto head = trim(fields[0]);
    const auto rel = trim(fields[1]);
    const auto tail = trim(fields[2]);
    if (head.empty() || rel.empty() || tail.empty()) throw ParseError(line_no, "empty field");
    builder.add(head, rel, tail);
  }
  return std::move(builder).finish();
}

KnowledgeGraph load_triples_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open knowledge graph file: " + path);
  return load_triples(in);
}

void load_type_map(KnowledgeGraph& g, std::istream& in, bool auto_intern) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> missing;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (is_blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    }
    const auto type = trim(fields[0]);
    const auto entity = trim(fields[1]);
    if (type.empty() || entity.empty()) throw ParseError(line_no, "empty field");
    if (!auto_intern && !g.find_entity(entity)) missing.emplace_back(entity);
    pairs.emplace_back(type, entity);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " unknown entity label(s) in type map:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg << " '" << missing[i] << "'";
    if (missing.size() > 20) msg << " ...";
    throw LookupError(msg.str());
  }
  for (const auto& [type, entity] : pairs) {
    const auto type_id = g.type_labels_.intern(type);
    if (type_id == g.types_.size()) g.types_.emplace_back();
    g.types_[type_id].push_back(g.intern_entity(entity));
  }
  for (auto& members : g.types_) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
  }
}

void write_sorted_tsv(const KnowledgeGraph& g, std::ostream& out) {
  std::vector<std::array<std::string_view, 3>> rows;
  rows.reserve(g.num_triples());
  for (const auto& t : g.triples()) {
    rows.push_back({g.entity_label(t.head), g.relation_label(t.relation), g.entity_label(t.tail)});
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& r : rows) out << r[0] << '\t' << r[1] << '\t' << r[2] << '\n';
}

}  // namespace simgrag
