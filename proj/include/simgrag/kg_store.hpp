#pragma once
// Knowledge-graph triple store.
//
// Entities and relations are interned into dense 0-based ids at load time.
// Triples are stored once (exact duplicates collapse) and indexed in a CSR
// adjacency that lists every triple under both its head (outgoing) and its
// tail (incoming), so neighbor scans ignore edge direction.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simgrag {

template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}
  constexpr auto operator<=>(const StrongId&) const = default;
};

struct EntityTag {};
struct RelationTag {};
using EntityId = StrongId<EntityTag>;
using RelationId = StrongId<RelationTag>;

using TripleIndex = std::uint32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  auto operator<=>(const Triple&) const = default;
};

enum class Direction : std::uint8_t { kOutgoing, kIncoming };

struct AdjacencyEntry {
  RelationId relation;
  EntityId neighbor;
  TripleIndex triple;
  Direction direction;

  bool operator==(const AdjacencyEntry&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Bidirectional id <-> label table.
class LabelTable {
 public:
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t id) const;
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

class KnowledgeGraph {
 public:
  const LabelTable& entities() const { return entities_; }
  const LabelTable& relations() const { return relations_; }
  std::span<const Triple> triples() const { return triples_; }

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  std::size_t num_triples() const { return triples_.size(); }

  const std::string& entity_label(EntityId id) const;
  const std::string& relation_label(RelationId id) const;
  std::optional<EntityId> find_entity(std::string_view label) const;
  std::optional<RelationId> find_relation(std::string_view label) const;

  // Every incidence of `v`, outgoing and incoming, ordered by triple index.
  // A self-loop appears twice.
  std::span<const AdjacencyEntry> neighbors(EntityId v) const;

  // Appends an entity with an empty adjacency list if `label` is new.
  EntityId intern_entity(std::string_view label);

  bool has_type_map() const { return !types_.empty(); }
  const LabelTable& type_labels() const { return type_labels_; }
  // Entities carrying the type, sorted ascending; empty for unknown types.
  std::span<const EntityId> entities_of_type(std::string_view type) const;
  std::span<const EntityId> entities_of_type(std::uint32_t type_id) const;

 private:
  friend class GraphBuilder;
  friend void load_type_map(KnowledgeGraph&, std::istream&, bool);

  LabelTable entities_;
  LabelTable relations_;
  std::vector<Triple> triples_;
  std::vector<std::size_t> offsets_{0};
  std::vector<AdjacencyEntry> adjacency_;

  LabelTable type_labels_;
  std::vector<std::vector<EntityId>> types_;
};

// Incremental construction; `finish` sorts adjacency into CSR form.
class GraphBuilder {
 public:
  // Returns false when the triple was a duplicate.
  bool add(std::string_view head, std::string_view relation, std::string_view tail);
  EntityId add_entity(std::string_view label);
  KnowledgeGraph finish() &&;

 private:
  struct TripleHash {
    std::size_t operator()(const Triple& t) const {
      std::uint64_t h = (static_cast<std::uint64_t>(t.head.value) << 32) ^ t.tail.value;
      h ^= static_cast<std::uint64_t>(t.relation.value) * 0x9E3779B97F4A7C15ull;
      return std::hash<std::uint64_t>{}(h);
    }
  };
  KnowledgeGraph graph_;
  std::unordered_map<Triple, TripleIndex, TripleHash> seen_;
};

// Parses head\trelation\ttail lines. Blank lines are skipped; fields are
// trimmed of surrounding whitespace; a trailing CR is tolerated.
KnowledgeGraph load_triples(std::istream& in);
KnowledgeGraph load_triples_file(const std::string& path);

// Merges type\tentity lines into the graph's type map. Unknown entity labels
// are interned when `auto_intern` is set, otherwise rejected as a group.
void load_type_map(KnowledgeGraph& g, std::istream& in, bool auto_intern = false);

// Label triples sorted by (head, relation, tail) bytes, one TSV line each.
void write_sorted_tsv(const KnowledgeGraph& g, std::ostream& out);

}  // namespace simgrag

template <typename Tag>
struct std::hash<simgrag::StrongId<Tag>> {
  std::size_t operator()(const simgrag::StrongId<Tag>& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
