#pragma once

// Straightforward serial implementations kept as test oracles and benchmark
// baselines for the parallel kernels.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/discrete_dataset.hpp"
#include "pnskit/estimate.hpp"
#include "pnskit/graph.hpp"
#include "pnskit/oracle.hpp"

namespace pnskit::reference {

// Every simple path between a and b in the skeleton of g, as node indices.
std::vector<std::vector<std::size_t>> simple_paths(const CausalGraph& g, std::size_t a, std::size_t b);

// Blocking rule on one path: a non-collider in z blocks it; a collider blocks
// it unless the collider or one of its descendants is in z.
bool path_blocked(const CausalGraph& g, std::span<const std::size_t> path, const std::vector<bool>& in_z);

// d-separation by enumerating every simple path between A and B.
bool d_separated_paths(const CausalGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& z);

// Row-by-row count table.
JointTable tabulate_serial(const DiscreteDataset& d, std::span<const std::string> vars);

// Single loop over the exogenous space, accumulating P(u) directly.
CounterfactualProfile enumerate_serial(const ScmSpec& m, std::string_view x, std::string_view y);

}  // namespace pnskit::reference
