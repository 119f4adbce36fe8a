#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "simgrag/pattern.hpp"
#include "simgrag/synthetic.hpp"
#include "pattern_gen.hpp"

namespace simgrag {
namespace {

PatternTriple tri(std::string h, std::string r, std::string t) {
  return {PatternTerm(std::move(h)), PatternTerm(std::move(r)), PatternTerm(std::move(t))};
}

const char* const kReferenceOutput = R"({
        "divided": [
            "the actor in Flashpoint",
            "this actor also appears in another films",
        ],
        "triples": [
            ("UNKNOWN actor 1", "actor of", "Flashpoint"),
            ("UNKNOWN actor 1", "actor of", "UNKNOWN film 1"),
        ]
    })";

TEST(PatternTerm, UnknownByPrefix) {
  EXPECT_TRUE(PatternTerm("UNKNOWN director 1").is_unknown());
  EXPECT_TRUE(PatternTerm("Satoshi Kon").is_known());
  EXPECT_TRUE(PatternTerm("unknown thing").is_known());
  EXPECT_EQ(PatternTerm("UNKNOWN director 1"), PatternTerm("UNKNOWN director 1"));
  EXPECT_NE(PatternTerm("UNKNOWN director 1"), PatternTerm("UNKNOWN director 2"));
}

TEST(PatternTerm, TypeHint) {
  EXPECT_EQ(PatternTerm("UNKNOWN person 1").type_hint(), "person");
  EXPECT_EQ(PatternTerm("UNKNOWN 1").type_hint(), "");
  EXPECT_EQ(PatternTerm("Paprika").type_hint(), "");
}

TEST(ParsePattern, ReferenceExample) {
  const auto p = parse_llm_pattern(kReferenceOutput);
  ASSERT_EQ(p.num_triples(), 2u);
  ASSERT_EQ(p.num_nodes(), 3u);
  const std::set<PatternTerm> nodes(p.nodes().begin(), p.nodes().end());
  EXPECT_EQ(nodes, (std::set<PatternTerm>{PatternTerm("UNKNOWN actor 1"), PatternTerm("Flashpoint"),
                                          PatternTerm("UNKNOWN film 1")}));
  EXPECT_TRUE(p.nodes()[0].is_unknown());
  for (const auto& t : p.triples()) {
    EXPECT_EQ(t.relation.text(), "actor of");
    EXPECT_TRUE(t.relation.is_known());
  }
  EXPECT_EQ(p.segments(),
            (std::vector<std::string>{"the actor in Flashpoint", "this actor also appears in another films"}));
}

TEST(ParsePattern, MinimalAllKnown) {
  const auto p = parse_llm_pattern(R"({"divided": ["x"], "triples": [("A","r","B")]})");
  ASSERT_EQ(p.num_triples(), 1u);
  EXPECT_EQ(p.triples()[0], tri("A", "r", "B"));
  EXPECT_TRUE(p.triples()[0].head.is_known());
  EXPECT_TRUE(p.triples()[0].relation.is_known());
  EXPECT_TRUE(p.triples()[0].tail.is_known());
  EXPECT_EQ(p.segments(), std::vector<std::string>{"x"});
}

TEST(ParsePattern, QuoteStyleAndTrailingCommasDoNotMatter) {
  const auto a = parse_llm_pattern(R"({"divided": ["s"], "triples": [("A", "r", "B"), ("B", "q", "C")]})");
  const auto b = parse_llm_pattern("{'divided': ['s',], 'triples': [('A', 'r', 'B'), ('B', 'q', 'C'),],}");
  const auto c = parse_llm_pattern("{\"divided\": [\"s\"], \"triples\": [('A', \"r\", 'B',), (\"B\", 'q', \"C\")]}");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(ParsePattern, SurroundingProseIgnored) {
  const auto p = parse_llm_pattern("Here is the structure:\n" + std::string(kReferenceOutput) + "\nHope this helps.");
  EXPECT_EQ(p.num_triples(), 2u);
}

TEST(ParsePattern, Errors) {
  EXPECT_THROW(parse_llm_pattern("I cannot help with that."), PatternFormatError);
  EXPECT_THROW(parse_llm_pattern(R"({"triples": []})"), PatternFormatError);
  EXPECT_THROW(parse_llm_pattern(R"(("A", "r", "B"), ("C", "r", "D"))"), PatternConnectivityError);
  EXPECT_THROW(parse_llm_pattern(R"(("A", "r", "B"), ('A', 'r', 'B'))"), PatternValidationError);
  EXPECT_THROW(parse_llm_pattern(R"(("A", "r", "A"))"), PatternValidationError);
}

TEST(ParsePattern, ErrorsShareABaseClass) {
  EXPECT_THROW(parse_llm_pattern("nothing"), PatternError);
  EXPECT_THROW(parse_llm_pattern(R"(("A", "r", "B"), ("C", "r", "D"))"), PatternError);
}

TEST(PatternGraph, NodesAndIncidence) {
  const PatternGraph p({tri("A", "r", "B"), tri("C", "s", "B"), tri("C", "t", "D")});
  ASSERT_EQ(p.num_nodes(), 4u);
  EXPECT_EQ(p.nodes()[0].text(), "A");
  EXPECT_EQ(p.nodes()[1].text(), "B");
  EXPECT_EQ(p.nodes()[2].text(), "C");
  EXPECT_EQ(p.nodes()[3].text(), "D");
  EXPECT_EQ(p.incident(1), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(p.head_node(1), 2u);
  EXPECT_EQ(p.tail_node(1), 1u);
}

TEST(PatternGraph, EmptyIsRejected) { EXPECT_THROW(PatternGraph({}), PatternFormatError); }

TEST(Serialize, CanonicalLines) {
  const PatternGraph p({tri("Tokyo Godfathers", "directed by", "UNKNOWN director 1"),
                        tri("UNKNOWN movie 1", "directed by", "UNKNOWN director 1")});
  EXPECT_EQ(serialize_pattern(p),
            "(\"Tokyo Godfathers\", \"directed by\", \"UNKNOWN director 1\")\n"
            "(\"UNKNOWN movie 1\", \"directed by\", \"UNKNOWN director 1\")\n");
}

TEST(Serialize, QuotesInsideLabelsSurvive) {
  const PatternGraph p({tri("Say \"hi\"", "it's", "back\\slash")});
  const auto back = parse_llm_pattern(serialize_pattern(p));
  ASSERT_EQ(back.num_triples(), 1u);
  EXPECT_EQ(back.triples()[0], p.triples()[0]);
}

TEST(RenderBlock, ReferenceLayout) {
  const auto p = parse_llm_pattern(kReferenceOutput);
  EXPECT_EQ(render_pattern_block(p, QuoteStyle::kDouble, 4), kReferenceOutput);
}

// Random valid patterns: random labels (including quotes), random shape.
TEST(RoundTrip, SerializeThenParse) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    const auto p = test::random_valid_pattern(rng);
    const auto lines = parse_llm_pattern(serialize_pattern(p));
    EXPECT_TRUE(std::ranges::equal(lines.triples(), p.triples())) << serialize_pattern(p);
    for (const auto style : {QuoteStyle::kDouble, QuoteStyle::kSingle}) {
      const auto block = parse_llm_pattern(render_pattern_block(p, style, 0));
      EXPECT_EQ(block, p) << render_pattern_block(p, style, 0);
    }
  }
}

TEST(Classify, SingleTriple) {
  EXPECT_EQ(classify_pattern(PatternGraph({tri("A", "r", "B")})), PatternShape::kOneHopPath);
}

TEST(Classify, TokyoGodfathersIsTwoHopPath) {
  const PatternGraph p({tri("Tokyo Godfathers", "directed by", "UNKNOWN director 1"),
                        tri("UNKNOWN movie 1", "directed by", "UNKNOWN director 1")});
  EXPECT_EQ(classify_pattern(p), PatternShape::kTwoHopPath);
}

TEST(Classify, StarAndConjunctions) {
  EXPECT_EQ(classify_pattern(PatternGraph({tri("UNKNOWN x", "r", "A"), tri("UNKNOWN x", "s", "B"),
                                           tri("C", "t", "UNKNOWN x")})),
            PatternShape::kThreeHopStar);
  EXPECT_EQ(classify_pattern(PatternGraph({tri("A", "r", "UNKNOWN x"), tri("UNKNOWN x", "s", "B")})),
            PatternShape::kTwoHopConjunction);
  EXPECT_EQ(classify_pattern(PatternGraph({tri("A", "r", "UNKNOWN x"), tri("UNKNOWN x", "s", "UNKNOWN y"),
                                           tri("UNKNOWN y", "t", "B")})),
            PatternShape::kThreeHopConjunction);
  EXPECT_EQ(classify_pattern(PatternGraph({tri("A", "r", "B"), tri("B", "s", "C"), tri("C", "t", "UNKNOWN d")})),
            PatternShape::kThreeHopPath);
}

TEST(Classify, CyclesAndLongPathsAreOther) {
  EXPECT_EQ(classify_pattern(PatternGraph({tri("A", "r", "B"), tri("B", "s", "C"), tri("C", "t", "A")})),
            PatternShape::kOther);
  EXPECT_EQ(classify_pattern(PatternGraph({tri("A", "r", "B"), tri("A", "s", "B")})), PatternShape::kOther);
  EXPECT_EQ(classify_pattern(PatternGraph({tri("A", "r", "B"), tri("B", "s", "C"), tri("C", "t", "D"),
                                           tri("D", "u", "E")})),
            PatternShape::kOther);
}

// Renaming Known labels, renaming placeholders, and flipping directions keep the class.
TEST(Classify, InvariantUnderRelabelingAndDirection) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto inst = random_instance(rng());
    const auto& p = inst.pattern;
    const auto expected = classify_pattern(p);
    std::vector<PatternTriple> renamed;
    auto rename = [](const PatternTerm& t) {
      return PatternTerm(t.is_unknown() ? t.text() + " renamed" : "known " + std::to_string(t.text().size()) +
                                                                     "/" + t.text());
    };
    for (const auto& t : p.triples()) {
      auto h = rename(t.head);
      auto r = PatternTerm(t.relation.is_unknown() ? t.relation.text() : "rel");
      auto tl = rename(t.tail);
      if (rng() % 2) std::swap(h, tl);
      renamed.push_back({h, r, tl});
    }
    bool duplicate = false;
    for (std::size_t a = 0; a < renamed.size(); ++a) {
      for (std::size_t b = a + 1; b < renamed.size(); ++b) duplicate = duplicate || renamed[a] == renamed[b];
    }
    if (duplicate) continue;
    EXPECT_EQ(classify_pattern(PatternGraph(renamed)), expected) << serialize_pattern(p);
  }
}

TEST(Classify, SixShapesFromSynthetic) {
  std::mt19937_64 rng(3);
  const auto g = random_graph(rng, {60, 200, 5});
  const std::pair<ShapeKind, PatternShape> cases[] = {
      {ShapeKind::kOneHop, PatternShape::kOneHopPath},
      {ShapeKind::kThreeHopStar, PatternShape::kThreeHopStar},
  };
  for (const auto& [kind, shape] : cases) {
    RandomPatternOptions po;
    po.unknown_terms = 1;
    EXPECT_EQ(classify_pattern(random_pattern(rng, g, kind, po)), shape) << to_string(kind);
  }
  RandomPatternOptions two;
  two.unknown_terms = 1;
  EXPECT_EQ(classify_pattern(random_pattern(rng, g, ShapeKind::kTwoHopConjunction, two)),
            PatternShape::kTwoHopConjunction);
  two.unknown_terms = 2;
  EXPECT_EQ(classify_pattern(random_pattern(rng, g, ShapeKind::kThreeHopConjunction, two)),
            PatternShape::kThreeHopConjunction);
}

}  // namespace
}  // namespace simgrag
