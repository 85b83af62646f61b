#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/discrete_dataset.hpp"
#include "pnskit/estimate.hpp"
#include "pnskit/graph.hpp"

namespace pnskit {

inline constexpr double kQuantityTolerance = 1e-9;

// Inputs to the population bounds: the two interventional probabilities and
// the observational joint of binary treatment x and outcome y.
struct CausalQuantities {
  double p_yx = 0.0;          // P(y_x)
  double p_yxp = 0.0;         // P(y_x')
  double p_xy = 0.0;          // P(x, y)
  double p_xy_not = 0.0;      // P(x, y')
  double p_x_not_y = 0.0;     // P(x', y)
  double p_x_not_y_not = 0.0; // P(x', y')
  double p_y = 0.0;           // P(y)

  // Fills p_y from the joint cells.
  static CausalQuantities from_joint(double p_yx, double p_yxp, double xy, double xy_not, double x_not_y,
                                     double x_not_y_not);

  // Throws InvalidQuantities naming the violated invariant.
  void validate() const;
};

struct StratumQuantities {
  std::string label;
  double weight = 0.0;  // P(z)
  CausalQuantities quantities;  // all conditional on z
};

enum class BoundMethod { TianPearl, Covariate, Backdoor };

// Short tags used on the command line and in reports: tp, thm1, thm2.
std::string_view method_tag(BoundMethod m);
BoundMethod parse_method_tag(std::string_view tag);

// Which argument of the max (lower) and min (upper) was active in a stratum.
struct BindingTerm {
  std::string stratum;
  int lower_arg = 0;
  int upper_arg = 0;
};

struct PnsInterval {
  double lower = 0.0;
  double upper = 1.0;
  BoundMethod method = BoundMethod::TianPearl;
  std::vector<BindingTerm> binding;

  double width() const { return upper - lower; }
  bool contains(double p, double tol = 0.0) const { return p >= lower - tol && p <= upper + tol; }
};

// Human-readable name of a max/min argument for the given method.
std::string_view lower_term_name(BoundMethod m, int arg);
std::string_view upper_term_name(BoundMethod m, int arg);

// Tight bounds from interventional and observational probabilities:
//   lower = max{0, P(y_x)-P(y_x'), P(y)-P(y_x'), P(y_x)-P(y)}
//   upper = min{P(y_x), P(y'_x'), P(x,y)+P(x',y'), P(y_x)-P(y_x')+P(x,y')+P(x',y)}
// Throws InvalidQuantities (also when the inputs are mutually inconsistent
// and the bounds cross).
PnsInterval tian_pearl_bounds(const CausalQuantities& q);

// Stratified bounds for a covariate set containing no descendant of x: the
// per-stratum max/min terms weighted by P(z). Zero-weight strata are
// skipped. Throws WeightMismatch, InvalidQuantities.
PnsInterval covariate_bounds(std::span<const StratumQuantities> strata);

// Bounds from observational data alone for a backdoor-admissible z:
//   lower = sum_z max{0, P(y|x,z)-P(y|x',z)} P(z)
//   upper = sum_z min{P(y|x,z), P(y'|x',z)} P(z)
// x and y must be binary. Throws PositivityViolation, UnknownVariable,
// NonBinaryVariable.
PnsInterval backdoor_bounds(const JointTable& t, const Event& x, const Event& y, std::span<const std::string> z);

// Per-stratum quantities with P(y_x|z) = P(y|x,z), valid when z is
// backdoor-admissible. Feeding these to covariate_bounds reproduces
// backdoor_bounds. Throws PositivityViolation.
std::vector<StratumQuantities> adjusted_strata(const JointTable& t, const Event& x, const Event& y,
                                               std::span<const std::string> z);

enum class AdjustmentPolicy { Explicit, FirstMinimal };

struct PnsReportOptions {
  AdjustmentPolicy policy = AdjustmentPolicy::FirstMinimal;
  NodeSet explicit_set;
  std::size_t max_set_size = 4;
  bool all_minimal_sets = false;  // also bound every other minimal set
};

struct PnsAlternative {
  NodeSet z;
  PnsInterval backdoor;
};

struct PnsReport {
  NodeSet z;
  bool z_checked = false;     // a graph was available to check z
  bool z_admissible = false;  // z passes the backdoor criterion in that graph
  double n = 0.0;
  std::size_t excluded_rows = 0;
  AdjustResult do_x;      // P(y | do(x))
  AdjustResult do_x_not;  // P(y | do(x'))
  CausalQuantities quantities;
  PnsInterval tp;
  PnsInterval thm1;
  PnsInterval thm2;
  std::vector<StratumQuantities> strata;
  std::vector<PnsAlternative> alternatives;
};

// Picks z (explicit, or the first minimal backdoor set of `graph`), then
// computes do-estimates, the population bounds from the adjusted quantities
// and the stratified bounds. With no graph the explicit set is used
// unchecked. Throws NoAdmissibleSet, PositivityViolation.
PnsReport pns_report(const DiscreteDataset& d, const CausalGraph* graph, const Event& x, const Event& y,
                     const PnsReportOptions& options);

}  // namespace pnskit
