#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnskit/bounds.hpp"
#include "pnskit/oracle.hpp"

namespace pnskit {

struct ValidationOptions {
  std::size_t seeds = 1000;         // random models per suite
  std::size_t max_covariates = 4;   // models cycle through 0..max_covariates
  std::uint64_t base_seed = 1;
  double tolerance = 1e-9;          // containment slack
  double adjust_tolerance = 1e-12;  // exact adjustment agreement
  std::size_t sampled_seeds = 100;
  std::size_t sample_size = 100000;
  double sampled_tolerance = 0.01;
  double sampled_pass_rate = 0.95;
  std::size_t reduction_vectors = 100;
};

struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::vector<std::string> examples;  // first few violations
  double seconds = 0.0;
  std::string note;

  bool passed() const { return violations == 0; }
};

// The i-th model of a suite: covariate count, role and latent confounding
// cycle deterministically with i; the seed is split from base_seed.
ScmSpec suite_model(const ValidationOptions& options, std::size_t i);

// Label swap (x <-> x', y <-> y'): PNS is unchanged and the swapped inputs
// must bound it again.
CausalQuantities swap_labels(const CausalQuantities& q);

// Exact PNS within the population bounds fed exact quantities, before and
// after the label swap.
SuiteResult containment_suite(const ValidationOptions& options);

// For every covariate subset: stratified bounds contain exact PNS and are no
// wider than the population bounds; backdoor bounds contain it whenever the
// subset is admissible in the model's graph.
SuiteResult covariate_suite(const ValidationOptions& options);

// Stratified bounds with one stratum equal the population bounds bit for bit.
SuiteResult reduction_suite(const ValidationOptions& options);

// Adjustment on the exact observational joint equals the interventional
// probability for every admissible covariate subset.
SuiteResult adjustment_suite(const ValidationOptions& options);

// Adjustment on sampled data: one check per seed, passing when both
// do-estimates land within sampled_tolerance. The suite fails when fewer than
// sampled_pass_rate of the seeds pass.
SuiteResult sampled_adjustment_suite(const ValidationOptions& options);

std::vector<SuiteResult> run_validation(const ValidationOptions& options, bool include_sampled = true);

}  // namespace pnskit
