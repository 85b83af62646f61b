#pragma once

// Shared builders for unit and acceptance tests.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pnskit/discrete_dataset.hpp"
#include "pnskit/graph.hpp"
#include "pnskit/oracle.hpp"
#include "pnskit/raw_table.hpp"

namespace fixtures {

// IBM hexadecimal float encoding, written independently of the parser.
// Values whose binary64 significand fits 56 bits encode exactly.
std::array<std::uint8_t, 8> encode_ibm(double v);

struct XptVar {
  std::string name;
  std::string label;
  bool numeric = true;
  std::size_t length = 8;
};

// SAS Transport V5 file with a single member. Cells are monostate (missing
// '.'), double, or string.
std::vector<std::uint8_t> write_xpt(const std::string& member, const std::vector<XptVar>& vars,
                                    const std::vector<std::vector<pnskit::Cell>>& rows);

// Dataset of binary variables from rows of 0/1 values.
pnskit::DiscreteDataset binary_dataset(const std::vector<std::string>& names, const std::vector<std::vector<int>>& rows);

// Dataset over X, Y, Z expanded from the 2x2x2 count table used by the
// adjustment and bound examples.
pnskit::DiscreteDataset adjustment_example();

enum class Structure { Chain, Fork, Collider };
const char* structure_name(Structure s);

// Three binary variables A, B, C wired as A->B->C, B<-A->C (A->B, A->C) or
// A->C<-B, with 3/16 noise on every non-root variable.
pnskit::ScmSpec structure_scm(Structure s);
pnskit::CausalGraph structure_graph(Structure s);

// DAG on n nodes N0..N{n-1}: bit k of mask enables the k-th pair (i<j) in
// row-major order as edge Ni -> Nj.
pnskit::CausalGraph dag_from_mask(std::size_t n, std::uint64_t mask);
pnskit::CausalGraph random_dag(std::size_t n, double edge_prob, std::mt19937_64& rng);

}  // namespace fixtures
