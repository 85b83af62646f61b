#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pnskit {

// Set of variable names, ordered lexicographically so that printing and
// enumeration are deterministic.
using NodeSet = std::set<std::string>;
using NamedEdge = std::pair<std::string, std::string>;

// Immutable named-node DAG. Node names are case-sensitive exact strings; node
// order is the order given at construction.
class CausalGraph {
 public:
  CausalGraph() = default;

  // Validates and builds. Throws CycleDetected (naming one cycle),
  // UnknownNode, DuplicateEdge or DuplicateNode.
  static CausalGraph build(std::vector<std::string> nodes, std::vector<NamedEdge> edges);

  const std::vector<std::string>& nodes() const { return names_; }
  // Edges in construction order.
  const std::vector<NamedEdge>& edges() const { return edges_; }
  std::size_t size() const { return names_.size(); }

  bool contains(std::string_view name) const;
  // Throws UnknownNode.
  std::size_t index(std::string_view name) const;
  const std::string& name(std::size_t i) const { return names_[i]; }

  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
  bool has_edge(std::size_t from, std::size_t to) const;
  bool adjacent(std::size_t a, std::size_t b) const { return has_edge(a, b) || has_edge(b, a); }

  // Node indices in a topological order (ties broken by construction order).
  const std::vector<std::size_t>& topological_order() const { return topo_; }

  NodeSet ancestors(std::string_view v) const;
  NodeSet descendants(std::string_view v) const;

  // Copy of the graph with every edge leaving `v` removed.
  CausalGraph without_outgoing(std::string_view v) const;

  friend bool operator==(const CausalGraph& a, const CausalGraph& b) {
    return a.names_ == b.names_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<NamedEdge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> topo_;
};

// Reachability ("Bayes-ball") d-separation test. A, B, Z must be pairwise
// disjoint (OverlappingSets) and name graph nodes (UnknownNode).
bool d_separated(const CausalGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& z);

// True iff no member of z descends from x and z blocks every path from x to y
// that starts with an arrow into x. Throws UnknownNode; x == y or z containing
// x or y throws OverlappingSets.
bool satisfies_backdoor(const CausalGraph& g, std::string_view x, std::string_view y, const NodeSet& z);

// All minimal backdoor-admissible sets with at most max_size members, ordered
// by size and then lexicographically.
std::vector<NodeSet> find_backdoor_sets(const CausalGraph& g, std::string_view x, std::string_view y,
                                        std::size_t max_size = 4);

std::string format_node_set(const NodeSet& s);

}  // namespace pnskit
