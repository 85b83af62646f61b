#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/discrete_dataset.hpp"

namespace pnskit {

// Partial assignment variable -> level, e.g. {X=1} or {Z1=0, Z2=1}.
using Event = std::map<std::string, int>;

// Parses "X=1" or "X=1,Z=0". Throws InvalidConfig.
Event parse_event(std::string_view text);
std::string format_event(const Event& e);

// Dense count table over the full cartesian product of declared levels.
// Weights are non-negative; they are row counts for tabulated data and may be
// exact probabilities for model-derived tables.
class JointTable {
 public:
  static constexpr std::size_t kMaxCells = std::size_t{1} << 24;

  JointTable() = default;
  // Throws TableTooLarge, EmptyTable (total must be positive), InvalidConfig
  // (weight count mismatch or negative weight).
  JointTable(std::vector<DiscreteVariable> variables, std::vector<double> weights, std::size_t excluded_rows = 0);

  const std::vector<DiscreteVariable>& variables() const { return vars_; }
  std::size_t num_cells() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double total() const { return total_; }
  // Rows left out because a tabulated variable was missing.
  std::size_t excluded_rows() const { return excluded_; }

  // Throws UnknownVariable.
  std::size_t var_index(std::string_view name) const;
  bool has_variable(std::string_view name) const;
  const DiscreteVariable& variable(std::string_view name) const { return vars_[var_index(name)]; }

  // Level index of variable `var` within cell `cell`.
  std::size_t level_at(std::size_t cell, std::size_t var) const { return (cell / strides_[var]) % vars_[var].cardinality(); }

  // Total weight of cells consistent with the partial assignment. Throws
  // UnknownVariable and UnknownLevel.
  double count(const Event& e) const;

  // Marginal table over `names`, in that order.
  JointTable marginal(std::span<const std::string> names) const;

  // Every full assignment of the named variables, in mixed-radix order with
  // the last name varying fastest.
  std::vector<Event> assignments(std::span<const std::string> names) const;

 private:
  std::vector<DiscreteVariable> vars_;
  std::vector<std::size_t> strides_;
  std::vector<double> weights_;
  double total_ = 0.0;
  std::size_t excluded_ = 0;
};

// Exact count table over `vars`. Rows missing any of `vars` are excluded
// (per-analysis deletion) and counted. Throws UnknownVariable, EmptyTable.
JointTable tabulate(const DiscreteDataset& d, std::span<const std::string> vars);

struct ProbEstimate {
  double value = 0.0;
  double support = 0.0;  // weight of the conditioning event
  double count = 0.0;    // weight of event ∧ condition
};

// P(event | given) as a relative frequency, with optional additive smoothing
// `alpha` over the cells of the event variables. Throws EmptyCondition when
// the conditioning weight is zero, OverlappingSets when the events share a
// variable.
ProbEstimate prob(const JointTable& t, const Event& event, const Event& given = {}, double alpha = 0.0);

struct AdjustStratum {
  Event z;
  double weight = 0.0;     // P(z)
  double support = 0.0;    // weight of (x, z)
  double p_outcome = 0.0;  // P(y | x, z)
};

struct AdjustResult {
  double value = 0.0;
  std::vector<AdjustStratum> strata;
};

// Backdoor adjustment: sum over z of P(y | x, z) P(z). Strata with P(z) = 0
// are skipped; a stratum with P(z) > 0 and no (x, z) weight throws
// PositivityViolation naming it.
AdjustResult do_adjust(const JointTable& t, const Event& x, const Event& y, std::span<const std::string> z,
                       double alpha = 0.0);

// Observational cell weights of binary treatment/outcome within one stratum.
struct BinaryStratum {
  Event z;
  double n = 0.0;
  double xy = 0.0, xy_not = 0.0, x_not_y = 0.0, x_not_y_not = 0.0;
};

// The other level of a binary variable's event (x -> x'). Throws
// NonBinaryVariable, InvalidConfig for multi-variable events.
Event complement(const JointTable& t, const Event& e);

// Per-stratum counts for binary x, y over every z assignment with weight > 0.
std::vector<BinaryStratum> binary_strata(const JointTable& t, const Event& x, const Event& y,
                                         std::span<const std::string> z);

}  // namespace pnskit
