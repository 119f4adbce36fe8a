#pragma once
// Pattern graphs produced by the query-to-pattern LLM step.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simgrag {

class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// No triples could be extracted from the text.
class PatternFormatError : public PatternError {
 public:
  using PatternError::PatternError;
};
class PatternConnectivityError : public PatternError {
 public:
  using PatternError::PatternError;
};
// Duplicate or self-loop triples.
class PatternValidationError : public PatternError {
 public:
  using PatternError::PatternError;
};

inline constexpr std::string_view kUnknownPrefix = "UNKNOWN";

// A Known label or an Unknown placeholder ("UNKNOWN director 1"). Two terms
// are equal iff their full text is equal.
class PatternTerm {
 public:
  PatternTerm() = default;
  explicit PatternTerm(std::string text) : text_(std::move(text)) {}

  const std::string& text() const { return text_; }
  bool is_unknown() const { return text_.starts_with(kUnknownPrefix); }
  bool is_known() const { return !is_unknown(); }

  // "UNKNOWN person 1" -> "person"; empty when the placeholder carries no hint.
  std::string type_hint() const;

  auto operator<=>(const PatternTerm&) const = default;

 private:
  std::string text_;
};

struct PatternTriple {
  PatternTerm head;
  PatternTerm relation;
  PatternTerm tail;

  auto operator<=>(const PatternTriple&) const = default;
};

// Validated pattern: nonempty, no duplicate triples, no self-loops, and
// connected when edge directions are ignored.
class PatternGraph {
 public:
  explicit PatternGraph(std::vector<PatternTriple> triples, std::vector<std::string> segments = {});

  std::span<const PatternTriple> triples() const { return triples_; }
  std::size_t num_triples() const { return triples_.size(); }
  const std::vector<std::string>& segments() const { return segments_; }

  // Distinct head/tail terms in order of first appearance.
  const std::vector<PatternTerm>& nodes() const { return nodes_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t head_node(std::size_t triple) const { return endpoints_[triple].first; }
  std::size_t tail_node(std::size_t triple) const { return endpoints_[triple].second; }
  // Pattern triples incident to a node, ascending.
  const std::vector<std::size_t>& incident(std::size_t node) const { return incident_[node]; }

  bool operator==(const PatternGraph& other) const {
    return triples_ == other.triples_ && segments_ == other.segments_;
  }

 private:
  std::vector<PatternTriple> triples_;
  std::vector<std::string> segments_;
  std::vector<PatternTerm> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
  std::vector<std::vector<std::size_t>> incident_;
};

// Tolerant extraction from raw LLM text: the "divided" string list (if any)
// and every parenthesized 3-tuple of quoted strings. Single or double quotes,
// trailing commas and surrounding prose are all accepted.
PatternGraph parse_llm_pattern(std::string_view text);

enum class QuoteStyle { kDouble, kSingle };

// Quoted field, escaping only when the label contains the quote character.
std::string quote_label(std::string_view label, QuoteStyle style);
std::string format_triple(std::string_view head, std::string_view relation, std::string_view tail,
                          QuoteStyle style);

// Canonical fixture/CLI form: one ("h", "r", "t") line per triple.
std::string serialize_pattern(const PatternGraph& p);

// The brace block the query-to-pattern prompt asks for, with the closing
// brace at `indent` spaces, keys at indent+4 and items at indent+8.
std::string render_pattern_block(const PatternGraph& p, QuoteStyle style, std::size_t indent);

enum class PatternShape {
  kOneHopPath,
  kTwoHopPath,
  kThreeHopPath,
  kTwoHopConjunction,
  kThreeHopConjunction,
  kThreeHopStar,
  kOther,
};

std::string_view to_string(PatternShape shape);

// Classifies on the undirected multigraph. Paths whose two ends are both
// Known with an Unknown interior node are conjunctions (the answer sits in
// the middle); every other simple path is a path.
PatternShape classify_pattern(const PatternGraph& p);

}  // namespace simgrag
