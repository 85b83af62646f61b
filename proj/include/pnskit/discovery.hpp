#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/estimate.hpp"
#include "pnskit/graph.hpp"
#include "pnskit/graph_io.hpp"

namespace pnskit {

// Strata whose smallest expected cell count falls below this are pooled into
// one combined stratum before the G² statistic is formed.
inline constexpr double kMinExpectedCount = 5.0;

struct CiTestResult {
  double statistic = 0.0;  // G²
  double dof = 0.0;
  double p_value = 1.0;
  bool independent = true;  // p_value > alpha
  std::size_t strata = 0;         // nonempty strata before pooling
  std::size_t pooled_strata = 0;  // of which were merged into the pooled stratum
};

// G² likelihood-ratio test of a ⊥ b | cond. Each stratum contributes
// (r-1)(c-1) degrees of freedom, where r and c count the levels of a and b
// observed in it; zero degrees of freedom give p = 1. Throws DegenerateTable
// when a or b takes a single value, OverlappingSets, UnknownVariable.
CiTestResult ci_test(const JointTable& t, std::string_view a, std::string_view b, std::span<const std::string> cond,
                     double alpha);

// Lexicographically ordered name pair used as a sepset key.
NamedEdge unordered_key(std::string_view a, std::string_view b);

struct Skeleton {
  std::vector<std::string> nodes;
  std::vector<NamedEdge> edges;  // endpoints in node order
  std::map<NamedEdge, NodeSet> sepsets;
  double alpha = 0.01;
  std::size_t tests = 0;

  bool adjacent(std::string_view a, std::string_view b) const;
  // nullptr when a and b are adjacent.
  const NodeSet* sepset(std::string_view a, std::string_view b) const;
};

// PC-stable search. Edge (a,b) is removed when some S drawn from the
// adjacencies of a or of b (as they stood at the start of the level) makes
// them independent; subsets are tried in increasing size, then in
// lexicographic order of node positions. Tests within a level run in
// parallel and removals are committed in edge order. A variable with a
// single observed value is treated as independent of everything.
Skeleton learn_skeleton(const JointTable& t, double alpha = 0.01, std::size_t max_cond = 3);

struct CpdagResult {
  std::vector<std::string> nodes;
  std::set<NamedEdge> directed;    // (parent, child)
  std::set<NamedEdge> undirected;  // unordered_key form
  std::map<NamedEdge, NodeSet> sepsets;
  double alpha = 0.01;
  std::vector<std::string> conflicts;  // edges left undirected by clashing v-structures

  bool adjacent(std::string_view a, std::string_view b) const;
  bool has_directed(std::string_view from, std::string_view to) const;
  bool has_undirected(std::string_view a, std::string_view b) const;
  // Same nodes and edge marks; sepsets and alpha are ignored.
  bool same_class(const CpdagResult& other) const;
  // Edges listed in node order.
  GraphFile to_graph_file() const;
};

// Orients a -> c <- b for every unshielded triple whose middle node is not in
// sepset(a, b). An edge proposed in both directions stays undirected and is
// recorded in `conflicts`.
CpdagResult orient_v_structures(const Skeleton& s);

// Applies the four Meek propagation rules until nothing changes. Only
// undirected edges are ever oriented, and never into a directed cycle.
CpdagResult complete_orientation(CpdagResult partial);

// Skeleton, v-structures and propagation in one call.
CpdagResult discover(const JointTable& t, double alpha = 0.01, std::size_t max_cond = 3);

// The Markov equivalence class of a DAG: its skeleton, its v-structures, and
// the propagated orientations.
CpdagResult cpdag_of(const CausalGraph& g);

}  // namespace pnskit
