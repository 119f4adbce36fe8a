#include "simgrag/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

namespace simgrag {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

bool closes_field(std::string_view s, std::size_t after_quote) {
  const auto j = skip_space(s, after_quote);
  return j >= s.size() || s[j] == ',' || s[j] == ')' || s[j] == ']' || s[j] == '}';
}

// Reads a quoted string starting at s[i]. A backslash escapes the next
// character. An unescaped quote only terminates the string when the next
// non-space character is a delimiter, so "Well-Digger's" survives inside
// single quotes.
std::optional<std::string> read_quoted(std::string_view s, std::size_t& i) {
  if (i >= s.size() || (s[i] != '"' && s[i] != '\'')) return std::nullopt;
  const char q = s[i];
  std::string out;
  for (std::size_t j = i + 1; j < s.size(); ++j) {
    const char c = s[j];
    if (c == '\\' && j + 1 < s.size()) {
      out.push_back(s[++j]);
      continue;
    }
    if (c == q && closes_field(s, j + 1)) {
      i = j + 1;
      return out;
    }
    out.push_back(c);
  }
  return std::nullopt;
}

// Attempts "(" q , q , q [,] ")" (or the bracketed equivalent) at s[i].
std::optional<PatternTriple> read_tuple(std::string_view s, std::size_t& i) {
  const char open = s[i];
  const char close = open == '(' ? ')' : ']';
  std::size_t j = i + 1;
  std::string fields[3];
  for (int f = 0; f < 3; ++f) {
    j = skip_space(s, j);
    auto value = read_quoted(s, j);
    if (!value) return std::nullopt;
    fields[f] = std::move(*value);
    j = skip_space(s, j);
    if (f < 2) {
      if (j >= s.size() || s[j] != ',') return std::nullopt;
      ++j;
    }
  }
  if (j < s.size() && s[j] == ',') j = skip_space(s, j + 1);
  if (j >= s.size() || s[j] != close) return std::nullopt;
  i = j + 1;
  return PatternTriple{PatternTerm(std::move(fields[0])), PatternTerm(std::move(fields[1])),
                       PatternTerm(std::move(fields[2]))};
}

std::size_t find_key(std::string_view s, std::string_view key) {
  for (const char q : {'"', '\''}) {
    const std::string quoted = std::string(1, q) + std::string(key) + q;
    if (auto pos = s.find(quoted); pos != std::string_view::npos) return pos + quoted.size();
  }
  return std::string_view::npos;
}

std::vector<std::string> read_divided(std::string_view s) {
  std::vector<std::string> out;
  auto pos = find_key(s, "divided");
  if (pos == std::string_view::npos) return out;
  pos = s.find('[', pos);
  if (pos == std::string_view::npos) return out;
  std::size_t i = pos + 1;
  while (true) {
    i = skip_space(s, i);
    if (i >= s.size() || s[i] == ']') break;
    auto value = read_quoted(s, i);
    if (!value) break;
    out.push_back(std::move(*value));
    i = skip_space(s, i);
    if (i < s.size() && s[i] == ',') ++i;
  }
  return out;
}

std::string indent(std::size_t n) { return std::string(n, ' '); }

}  // namespace

std::string PatternTerm::type_hint() const {
  if (!is_unknown()) return {};
  std::string_view rest(text_);
  rest.remove_prefix(kUnknownPrefix.size());
  while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
  while (!rest.empty() && is_space(rest.back())) rest.remove_suffix(1);
  // Drop a trailing numeric id ("person 1" -> "person").
  auto end = rest.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(rest[end - 1]))) --end;
  if (end < rest.size()) {
    rest = rest.substr(0, end);
    while (!rest.empty() && is_space(rest.back())) rest.remove_suffix(1);
  }
  return std::string(rest);
}

PatternGraph::PatternGraph(std::vector<PatternTriple> triples, std::vector<std::string> segments)
    : triples_(std::move(triples)), segments_(std::move(segments)) {
  if (triples_.empty()) throw PatternFormatError("pattern has no triples");
  std::set<PatternTriple> seen;
  std::map<PatternTerm, std::size_t> node_ids;
  const auto node_of = [&](const PatternTerm& t) {
    auto [it, inserted] = node_ids.emplace(t, nodes_.size());
    if (inserted) {
      nodes_.push_back(t);
      incident_.emplace_back();
    }
    return it->second;
  };
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    const auto& t = triples_[i];
    if (t.head.text().empty() || t.relation.text().empty() || t.tail.text().empty()) {
      throw PatternValidationError("triple " + std::to_string(i + 1) + " has an empty term");
    }
    if (!seen.insert(t).second) {
      throw PatternValidationError("duplicate triple (" + t.head.text() + ", " + t.relation.text() + ", " +
                                   t.tail.text() + ")");
    }
    if (t.head == t.tail) {
      throw PatternValidationError("self-loop triple on '" + t.head.text() + "'");
    }
    const auto h = node_of(t.head);
    const auto tl = node_of(t.tail);
    endpoints_.emplace_back(h, tl);
    incident_[h].push_back(i);
    incident_[tl].push_back(i);
  }

  std::vector<std::size_t> parent(nodes_.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [h, t] : endpoints_) parent[find(h)] = find(t);
  for (std::size_t v = 1; v < nodes_.size(); ++v) {
    if (find(v) != find(0)) {
      throw PatternConnectivityError("pattern is disconnected: '" + nodes_[v].text() + "' is unreachable from '" +
                                     nodes_[0].text() + "'");
    }
  }
}

PatternGraph parse_llm_pattern(std::string_view text) {
  auto segments = read_divided(text);
  std::vector<PatternTriple> triples;
  const auto key = find_key(text, "triples");
  const std::size_t start = key == std::string_view::npos ? 0 : key;
  const bool allow_brackets = key != std::string_view::npos;
  for (std::size_t i = start; i < text.size();) {
    if (text[i] == '(' || (allow_brackets && text[i] == '[')) {
      std::size_t j = i;
      if (auto t = read_tuple(text, j)) {
        triples.push_back(std::move(*t));
        i = j;
        continue;
      }
    }
    ++i;
  }
  if (triples.empty()) throw PatternFormatError("no parsable triples in LLM output");
  return PatternGraph(std::move(triples), std::move(segments));
}

std::string quote_label(std::string_view label, QuoteStyle style) {
  const char q = style == QuoteStyle::kDouble ? '"' : '\'';
  std::string out(1, q);
  for (char c : label) {
    if (c == q || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back(q);
  return out;
}

std::string format_triple(std::string_view head, std::string_view relation, std::string_view tail,
                          QuoteStyle style) {
  return "(" + quote_label(head, style) + ", " + quote_label(relation, style) + ", " + quote_label(tail, style) + ")";
}

std::string serialize_pattern(const PatternGraph& p) {
  std::string out;
  for (const auto& t : p.triples()) {
    out += format_triple(t.head.text(), t.relation.text(), t.tail.text(), QuoteStyle::kDouble);
    out += '\n';
  }
  return out;
}

std::string render_pattern_block(const PatternGraph& p, QuoteStyle style, std::size_t base) {
  std::ostringstream out;
  out << "{\n" << indent(base + 4) << "\"divided\": [\n";
  for (const auto& s : p.segments()) out << indent(base + 8) << quote_label(s, style) << ",\n";
  out << indent(base + 4) << "],\n" << indent(base + 4) << "\"triples\": [\n";
  for (const auto& t : p.triples()) {
    out << indent(base + 8) << format_triple(t.head.text(), t.relation.text(), t.tail.text(), style) << ",\n";
  }
  out << indent(base + 4) << "]\n" << indent(base) << "}";
  return out.str();
}

std::string_view to_string(PatternShape shape) {
  switch (shape) {
    case PatternShape::kOneHopPath: return "1-hop path";
    case PatternShape::kTwoHopPath: return "2-hop path";
    case PatternShape::kThreeHopPath: return "3-hop path";
    case PatternShape::kTwoHopConjunction: return "2-hop conjunction";
    case PatternShape::kThreeHopConjunction: return "3-hop conjunction";
    case PatternShape::kThreeHopStar: return "3-hop star";
    case PatternShape::kOther: return "other";
  }
  return "other";
}

PatternShape classify_pattern(const PatternGraph& p) {
  const auto m = p.num_triples();
  const auto n = p.num_nodes();
  if (m == 1) return PatternShape::kOneHopPath;
  if (n != m + 1) return PatternShape::kOther;  // cycle or parallel edges

  std::vector<std::size_t> degree(n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    ++degree[p.head_node(i)];
    ++degree[p.tail_node(i)];
  }
  const auto max_degree = *std::max_element(degree.begin(), degree.end());
  if (m == 3 && max_degree == 3) return PatternShape::kThreeHopStar;
  if (max_degree != 2 || (m != 2 && m != 3)) return PatternShape::kOther;

  bool ends_known = true;
  bool interior_unknown = false;
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] == 1) ends_known = ends_known && p.nodes()[v].is_known();
    else interior_unknown = interior_unknown || p.nodes()[v].is_unknown();
  }
  const bool conjunction = ends_known && interior_unknown;
  if (m == 2) return conjunction ? PatternShape::kTwoHopConjunction : PatternShape::kTwoHopPath;
  return conjunction ? PatternShape::kThreeHopConjunction : PatternShape::kThreeHopPath;
}

}  // namespace simgrag
