#pragma once
// Exhaustive check of the search lower bound: every intermediate state of a
// plan is enumerated, and its bound is compared with the best GSD over all
// of its completions (recomputed from scratch with compute_gsd).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "simgrag/gsd.hpp"
#include "simgrag/retrieval.hpp"

namespace simgrag::test {

struct BoundReport {
  std::size_t states = 0;
  std::size_t complete = 0;
  std::size_t violations = 0;  // bound above the best completion
  std::size_t inexact = 0;     // bound differs from GSD at a complete mapping
  std::size_t drift = 0;       // accumulated distance differs from recomputation
  std::size_t decreases = 0;   // bound dropped along an expansion
  std::string first_failure;

  bool ok() const { return violations == 0 && inexact == 0 && drift == 0 && decreases == 0; }
};

class BoundChecker {
 public:
  BoundChecker(const PatternGraph& p, const KnowledgeGraph& g, const CandidateSets& cands, const PatternVectors& pv,
               const VectorIndex& nodes, const VectorIndex& relations, double tolerance = 1e-9)
      : p_(p), g_(g), cands_(cands), pv_(pv), nodes_(nodes), relations_(relations), tol_(tolerance),
        plan_(order_triples(p, cands)) {}

  // Stops after max_states states; returns the report so far.
  BoundReport run(std::size_t max_states = 200000) {
    max_states_ = max_states;
    SearchState root;
    root.partial.node_map.assign(p_.num_nodes(), SearchState::kUnmapped);
    root.partial.edge_map.assign(p_.num_triples(), SearchState::kUnassigned);
    const double root_bound = lower_bound(plan_, root);
    ++report_.states;
    double best = std::numeric_limits<double>::infinity();
    cands_.nodes[plan_.start_node].for_each_by_id([&](EntityId e, double d) {
      if (report_.states >= max_states_) return;
      SearchState s = root;
      s.started = true;
      s.partial.node_map[plan_.start_node] = e;
      s.mapped_distance = d;
      const double b = lower_bound(plan_, s);
      if (b + slack(b) < root_bound) note(report_.decreases, "bound decreased at the start node");
      best = std::min(best, visit(s));
    });
    if (best < root_bound - slack(root_bound)) note(report_.violations, "empty-mapping bound above the best GSD");
    return report_;
  }

 private:
  double slack(double x) const { return tol_ * std::max(1.0, std::abs(x)); }

  void note(std::size_t& counter, const std::string& what) {
    ++counter;
    if (report_.first_failure.empty()) report_.first_failure = what;
  }

  // Returns the best completion GSD below `s` (+inf when none).
  double visit(SearchState& s) {
    ++report_.states;
    const double bound = lower_bound(plan_, s);
    const double recomputed = mapped_distance(p_, g_, cands_, plan_, s.partial, s.matched);
    if (std::abs(recomputed - s.mapped_distance) > slack(recomputed)) note(report_.drift, "accumulated distance drift");

    if (s.matched == plan_.steps.size()) {
      ++report_.complete;
      const double gsd = compute_gsd(p_, g_, s.partial, pv_, nodes_, relations_);
      if (std::abs(gsd - bound) > slack(gsd)) {
        note(report_.inexact, "bound " + std::to_string(bound) + " != gsd " + std::to_string(gsd));
      }
      return gsd;
    }

    double best = std::numeric_limits<double>::infinity();
    const auto& step = plan_.steps[s.matched];
    const auto anchor = s.partial.node_map[step.anchor];
    for (const auto& e : g_.neighbors(anchor)) {
      if (report_.states >= max_states_) break;
      if (std::find(s.partial.edge_map.begin(), s.partial.edge_map.end(), e.triple) != s.partial.edge_map.end()) {
        continue;
      }
      const auto rd = cands_.relations[step.triple].distance(e.relation);
      if (!rd) continue;
      double cost = *rd;
      if (step.other_is_new) {
        if (std::find(s.partial.node_map.begin(), s.partial.node_map.end(), e.neighbor) !=
            s.partial.node_map.end()) {
          continue;
        }
        const auto nd = cands_.nodes[step.other].distance(e.neighbor);
        if (!nd) continue;
        cost += *nd;
      } else if (s.partial.node_map[step.other] != e.neighbor) {
        continue;
      }

      SearchState next = s;
      next.matched = s.matched + 1;
      next.partial.edge_map[step.triple] = e.triple;
      if (step.other_is_new) next.partial.node_map[step.other] = e.neighbor;
      next.mapped_distance = s.mapped_distance + cost;
      const double next_bound = lower_bound(plan_, next);
      if (next_bound + slack(next_bound) < bound) note(report_.decreases, "bound decreased along an expansion");
      best = std::min(best, visit(next));
    }
    if (best < bound - slack(bound)) {
      note(report_.violations, "bound " + std::to_string(bound) + " above best completion " + std::to_string(best));
    }
    return best;
  }

  const PatternGraph& p_;
  const KnowledgeGraph& g_;
  const CandidateSets& cands_;
  const PatternVectors& pv_;
  const VectorIndex& nodes_;
  const VectorIndex& relations_;
  double tol_;
  SearchPlan plan_;
  std::size_t max_states_ = 0;
  BoundReport report_;
};

}  // namespace simgrag::test
