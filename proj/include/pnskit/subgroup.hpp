#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/bounds.hpp"
#include "pnskit/discrete_dataset.hpp"
#include "pnskit/estimate.hpp"

namespace pnskit {

// z for a two-sided interval at the given confidence (0.90, 0.95 or 0.99).
// Throws InvalidConfidence.
double z_for_confidence(double confidence);

// Smallest n whose worst-case (p = 0.5) margin of error is at most `margin`:
// ceil(z² · 0.25 / margin²). Throws InvalidMargin, InvalidConfidence.
std::size_t required_n(double margin, double confidence);

// Worst-case margin of error achieved with n rows.
double margin_of_error(std::size_t n, double confidence);

struct SubgroupConstraint {
  std::string variable;
  std::set<int> levels;  // row matches when its level is any of these
};

struct SubgroupSpec {
  std::string name;
  std::vector<SubgroupConstraint> constraints;

  // Throws InvalidSubgroup (repeated variable, empty level set),
  // UnknownVariable, UnknownLevel.
  void validate(const DiscreteDataset& d) const;
};

// "age60=1,gender=0|1" or "name:age60=1,gender=1". Without a name the text
// itself is used. Throws InvalidSubgroup.
SubgroupSpec parse_subgroup_spec(std::string_view text);

// Rows satisfying every constraint; rows with a kept-missing level never
// match. Throws UnknownVariable.
DiscreteDataset filter_subgroup(const DiscreteDataset& d, const SubgroupSpec& spec);

struct SubgroupConfig {
  double margin = 0.05;
  double confidence = 0.95;
};

struct SubgroupReport {
  SubgroupSpec spec;
  std::size_t rows = 0;           // rows matching the spec
  double n = 0.0;                 // rows used after per-analysis deletion
  std::size_t required = 0;       // required_n(margin, confidence)
  bool meets_size = false;        // n >= required
  double margin = 0.0;            // margin of error achieved at n
  double do_x = 0.0;              // P(y | do(x)) within the subgroup
  double do_x_not = 0.0;          // P(y | do(x'))
  PnsInterval interval;           // backdoor bounds within the subgroup
};

// Backdoor bounds and do-estimates on the rows of one subgroup, adjusting
// for z. Undersized groups are reported with meets_size = false. Errors carry
// the subgroup name; throws EmptyTable when no rows match.
SubgroupReport analyze_subgroup(const DiscreteDataset& d, const SubgroupSpec& spec, const Event& x, const Event& y,
                                std::span<const std::string> z, const SubgroupConfig& config = {});

struct ScanOptions {
  std::size_t depth = 1;  // maximum number of constrained variables
  std::size_t min_n = 0;  // groups with fewer matching rows are skipped
  SubgroupConfig config;
};

struct SkippedSubgroup {
  std::string name;
  std::string reason;
};

struct ScanResult {
  std::vector<SubgroupReport> reports;  // lower bound descending, then name
  std::vector<SkippedSubgroup> skipped;
  std::size_t candidates = 0;
};

// Every combination of at most `depth` candidate variables, each fixed to a
// single level. Candidates must not include the treatment or outcome
// (InvalidSubgroup). Groups under min_n, or failing positivity, are listed
// in `skipped`.
ScanResult scan_subgroups(const DiscreteDataset& d, std::span<const std::string> candidates, const Event& x,
                          const Event& y, std::span<const std::string> z, const ScanOptions& options);

// Aligned text table: Subpopulation | n | Bounds of PNS | do-estimates | size.
std::string format_subgroup_table(std::span<const SubgroupReport> reports);

}  // namespace pnskit
