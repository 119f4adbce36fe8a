#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "simgrag/kg_store.hpp"
#include "simgrag/synthetic.hpp"
#include "support.hpp"

namespace simgrag {
namespace {

using test::graph_of;

using LabelTriple = std::tuple<std::string, std::string, std::string>;

std::multiset<LabelTriple> label_triples(const KnowledgeGraph& g) {
  std::multiset<LabelTriple> out;
  for (const auto& t : g.triples()) {
    out.insert({g.entity_label(t.head), g.relation_label(t.relation), g.entity_label(t.tail)});
  }
  return out;
}

TEST(LoadTriples, SingleLine) {
  std::istringstream in("Tokyo Godfathers\trelease year\t2003\n");
  const auto g = load_triples(in);
  EXPECT_EQ(g.num_entities(), 2u);
  EXPECT_EQ(g.num_relations(), 1u);
  EXPECT_EQ(g.num_triples(), 1u);
  EXPECT_EQ(g.entity_label(EntityId{0}), "Tokyo Godfathers");
  EXPECT_EQ(g.entity_label(EntityId{1}), "2003");
  EXPECT_EQ(g.relation_label(RelationId{0}), "release year");
}

TEST(LoadTriples, EmptyStream) {
  std::istringstream in("");
  const auto g = load_triples(in);
  EXPECT_EQ(g.num_entities(), 0u);
  EXPECT_EQ(g.num_relations(), 0u);
  EXPECT_EQ(g.num_triples(), 0u);
}

TEST(LoadTriples, DuplicatesCollapse) {
  std::mt19937_64 rng(7);
  std::vector<std::string> unique_lines;
  std::set<std::string> seen;
  while (unique_lines.size() < 83) {
    const auto line = "e" + std::to_string(rng() % 40) + "\tr" + std::to_string(rng() % 5) + "\te" +
                      std::to_string(rng() % 40);
    if (seen.insert(line).second) unique_lines.push_back(line);
  }
  std::vector<std::string> lines = unique_lines;
  for (int i = 0; i < 17; ++i) lines.push_back(unique_lines[rng() % unique_lines.size()]);
  std::shuffle(lines.begin(), lines.end(), rng);
  ASSERT_EQ(lines.size(), 100u);

  std::string text;
  for (const auto& l : lines) text += l + "\n";
  std::istringstream in(text);
  const auto g = load_triples(in);

  std::set<std::string> oracle(lines.begin(), lines.end());
  EXPECT_EQ(g.num_triples(), oracle.size());
  EXPECT_EQ(g.num_triples(), 83u);
}

TEST(LoadTriples, WrongFieldCountReportsLine) {
  std::istringstream in("a\tr\tb\nonly\ttwo\n");
  try {
    load_triples(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadTriples, EmptyFieldIsError) {
  std::istringstream in("a\t\tb\n");
  EXPECT_THROW(load_triples(in), ParseError);
}

TEST(LoadTriples, TrimsFieldsAndToleratesCrLf) {
  std::istringstream in(" a \t r\tb \r\n\n");
  const auto g = load_triples(in);
  ASSERT_EQ(g.num_triples(), 1u);
  EXPECT_TRUE(g.find_entity("a").has_value());
  EXPECT_TRUE(g.find_entity("b").has_value());
  EXPECT_TRUE(g.find_relation("r").has_value());
}

TEST(LoadTriples, LabelsAreCaseSensitive) {
  const auto g = graph_of({"Paprika|directed by|Satoshi Kon", "paprika|directed by|Satoshi Kon"});
  EXPECT_EQ(g.num_entities(), 3u);
}

TEST(LoadTriples, ParallelEdgesKept) {
  const auto g = graph_of({"A|r1|B", "A|r2|B", "A|r1|B"});
  EXPECT_EQ(g.num_triples(), 2u);
}

TEST(Neighbors, SingleEdge) {
  const auto g = graph_of({"A|r|B"});
  const auto b = *g.find_entity("B");
  const auto adj = g.neighbors(b);
  ASSERT_EQ(adj.size(), 1u);
  EXPECT_EQ(adj[0].relation, *g.find_relation("r"));
  EXPECT_EQ(adj[0].neighbor, *g.find_entity("A"));
  EXPECT_EQ(adj[0].triple, 0u);
  EXPECT_EQ(adj[0].direction, Direction::kIncoming);
}

TEST(Neighbors, IsolatedEntityIsEmpty) {
  auto g = graph_of({"A|r|B"});
  const auto lonely = g.intern_entity("Lonely");
  EXPECT_TRUE(g.neighbors(lonely).empty());
  EXPECT_EQ(g.intern_entity("Lonely"), lonely);
}

TEST(Neighbors, InvalidIdIsLookupError) {
  const auto g = graph_of({"A|r|B"});
  EXPECT_THROW(g.neighbors(EntityId{2}), LookupError);
}

TEST(Neighbors, UnionIsTwiceTheTripleMultiset) {
  std::mt19937_64 rng(11);
  const auto g = random_graph(rng, {30, 50, 4});
  ASSERT_EQ(g.num_triples(), 50u);

  std::map<TripleIndex, int> seen;
  std::size_t outgoing = 0;
  for (std::uint32_t v = 0; v < g.num_entities(); ++v) {
    for (const auto& e : g.neighbors(EntityId{v})) {
      ++seen[e.triple];
      outgoing += e.direction == Direction::kOutgoing ? 1 : 0;
    }
  }
  EXPECT_EQ(seen.size(), g.num_triples());
  for (const auto& [t, count] : seen) EXPECT_EQ(count, 2) << "triple " << t;
  EXPECT_EQ(outgoing, g.num_triples());
}

TEST(Neighbors, OrderedByTripleIndex) {
  std::mt19937_64 rng(12);
  const auto g = random_graph(rng, {40, 120, 5});
  for (std::uint32_t v = 0; v < g.num_entities(); ++v) {
    const auto adj = g.neighbors(EntityId{v});
    EXPECT_TRUE(std::is_sorted(adj.begin(), adj.end(),
                               [](const AdjacencyEntry& a, const AdjacencyEntry& b) { return a.triple < b.triple; }));
  }
}

// Adjacency completeness over several random graphs.
TEST(Neighbors, EveryEntryMatchesAStoredTriple) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto g = random_graph(rng, {25 + seed, 60 + 3 * seed, 3 + seed % 5});
    for (std::uint32_t v = 0; v < g.num_entities(); ++v) {
      for (const auto& e : g.neighbors(EntityId{v})) {
        const auto& t = g.triples()[e.triple];
        EXPECT_EQ(t.relation, e.relation);
        if (e.direction == Direction::kOutgoing) {
          EXPECT_EQ(t.head, EntityId{v});
          EXPECT_EQ(t.tail, e.neighbor);
        } else {
          EXPECT_EQ(t.tail, EntityId{v});
          EXPECT_EQ(t.head, e.neighbor);
        }
      }
    }
  }
}

TEST(TypeMap, SingleEntry) {
  auto g = graph_of({"Anne Monson|occupation|actress"});
  std::istringstream in("person\tAnne Monson\n");
  load_type_map(g, in);
  EXPECT_TRUE(g.has_type_map());
  const auto members = g.entities_of_type("person");
  ASSERT_EQ(members.size(), 1u);
  EXPECT_EQ(members[0], *g.find_entity("Anne Monson"));
  EXPECT_TRUE(g.entities_of_type("film").empty());
}

TEST(TypeMap, EmptySource) {
  auto g = graph_of({"A|r|B"});
  std::istringstream in("");
  load_type_map(g, in);
  EXPECT_FALSE(g.has_type_map());
  EXPECT_EQ(g.type_labels().size(), 0u);
}

TEST(TypeMap, UnknownEntityRejectedWithOffenders) {
  auto g = graph_of({"A|r|B"});
  std::istringstream in("person\tA\nperson\tGhost\nfilm\tPhantom\n");
  try {
    load_type_map(g, in);
    FAIL() << "expected LookupError";
  } catch (const LookupError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("Ghost"), std::string::npos);
    EXPECT_NE(what.find("Phantom"), std::string::npos);
  }
}

TEST(TypeMap, AutoIntern) {
  auto g = graph_of({"A|r|B"});
  std::istringstream in("person\tGhost\n");
  load_type_map(g, in, true);
  const auto ghost = g.find_entity("Ghost");
  ASSERT_TRUE(ghost.has_value());
  EXPECT_TRUE(g.neighbors(*ghost).empty());
  ASSERT_EQ(g.entities_of_type("person").size(), 1u);
}

TEST(TypeMap, RandomPairsMatchGroupingOracle) {
  std::mt19937_64 rng(5);
  auto g = random_graph(rng, {200, 400, 4});
  std::map<std::string, std::set<std::string>> oracle;
  std::string text;
  for (int i = 0; i < 1000; ++i) {
    const auto type = "type" + std::to_string(rng() % 13);
    const auto& entity = g.entity_label(EntityId{static_cast<std::uint32_t>(rng() % g.num_entities())});
    oracle[type].insert(entity);
    text += type + "\t" + entity + "\n";
  }
  std::istringstream in(text);
  load_type_map(g, in);
  EXPECT_EQ(g.type_labels().size(), oracle.size());
  for (const auto& [type, members] : oracle) {
    const auto got = g.entities_of_type(type);
    EXPECT_EQ(got.size(), members.size()) << type;
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
    std::set<std::string> labels;
    for (const auto e : got) labels.insert(g.entity_label(e));
    EXPECT_EQ(labels, members) << type;
  }
}

TEST(Properties, SortedTsvRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const auto g = random_graph(rng, {50, 150, 6});
    std::ostringstream out;
    write_sorted_tsv(g, out);
    std::istringstream in(out.str());
    const auto reloaded = load_triples(in);
    EXPECT_EQ(label_triples(reloaded), label_triples(g));

    std::ostringstream again;
    write_sorted_tsv(reloaded, again);
    EXPECT_EQ(again.str(), out.str());
  }
}

TEST(Properties, DeterministicIds) {
  std::mt19937_64 rng(99);
  const auto g = random_graph(rng, {80, 200, 7});
  std::ostringstream out;
  write_sorted_tsv(g, out);
  std::istringstream a(out.str());
  std::istringstream b(out.str());
  const auto ga = load_triples(a);
  const auto gb = load_triples(b);
  EXPECT_EQ(ga.entities().labels(), gb.entities().labels());
  EXPECT_EQ(ga.relations().labels(), gb.relations().labels());
  ASSERT_EQ(ga.num_triples(), gb.num_triples());
  for (std::size_t i = 0; i < ga.num_triples(); ++i) EXPECT_EQ(ga.triples()[i], gb.triples()[i]);
}

TEST(Properties, FirstOccurrenceAssignsIds) {
  const auto g = graph_of({"C|r2|A", "A|r1|B", "B|r2|D"});
  EXPECT_EQ(g.entities().labels(), (std::vector<std::string>{"C", "A", "B", "D"}));
  EXPECT_EQ(g.relations().labels(), (std::vector<std::string>{"r2", "r1"}));
  for (std::uint32_t i = 0; i < g.num_entities(); ++i) {
    EXPECT_EQ(g.find_entity(g.entity_label(EntityId{i})), EntityId{i});
  }
}

}  // namespace
}  // namespace simgrag
