#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/bounds.hpp"
#include "pnskit/discrete_dataset.hpp"
#include "pnskit/estimate.hpp"
#include "pnskit/graph.hpp"

namespace pnskit {

// Exogenous variable with levels 0..k-1.
struct ExogenousVar {
  std::string name;
  std::vector<double> probs;

  std::size_t cardinality() const { return probs.size(); }
};

// Endogenous variable with levels 0..cardinality-1. The truth table is indexed
// by the inputs (parents, then exogenous) in mixed radix, last input fastest.
struct Mechanism {
  std::string name;
  int cardinality = 2;
  std::vector<std::string> parents;
  std::vector<std::string> exogenous;
  std::vector<int> table;
};

class ScmSpec {
 public:
  static constexpr double kProbTolerance = 1e-12;

  ScmSpec() = default;
  // Validates and orders mechanisms topologically. Throws InvalidScm,
  // CycleDetected.
  static ScmSpec build(std::vector<ExogenousVar> exogenous, std::vector<Mechanism> mechanisms);

  const std::vector<ExogenousVar>& exogenous() const { return exo_; }
  // Mechanisms in topological order.
  const std::vector<Mechanism>& mechanisms() const { return mech_; }
  const Mechanism& mechanism(std::string_view name) const;
  std::size_t endogenous_index(std::string_view name) const;
  std::vector<std::string> endogenous_names() const;

  // Endogenous nodes plus every exogenous variable shared by two or more
  // mechanisms (a latent common cause).
  const CausalGraph& graph() const { return graph_; }
  std::vector<std::string> latent_nodes() const;

  // Product of exogenous cardinalities, saturating at SIZE_MAX.
  std::size_t state_space() const;

  // Exogenous assignment of linear state `s` (last exogenous fastest).
  void decode_state(std::size_t s, std::vector<int>& u) const;
  double state_probability(std::span<const int> u) const;

  // Values of all endogenous variables (in mechanism order) under exogenous
  // assignment `u`, optionally with one variable forced to a level.
  void evaluate(std::span<const int> u, std::vector<int>& out, std::optional<std::pair<std::size_t, int>> intervention = {}) const;

  std::optional<std::uint64_t> seed;  // generator seed, when random
  std::string description;

 private:
  struct Wiring {
    std::vector<std::size_t> parents;    // endogenous indices
    std::vector<std::size_t> exogenous;  // exogenous indices
    std::vector<std::size_t> strides;    // per input
  };
  std::vector<ExogenousVar> exo_;
  std::vector<Mechanism> mech_;
  std::vector<Wiring> wiring_;
  CausalGraph graph_;
};

struct CounterfactualProfile {
  std::string x;
  std::string y;
  double p_yx = 0.0;   // P(y_x), y = 1, x = 1
  double p_yxp = 0.0;  // P(y_x')
  double exact_pns = 0.0;
  std::size_t states = 0;
  // Exact observational distribution over the endogenous variables.
  JointTable observational;
  // Exact joint of (Y under do(x), Y under do(x'), endogenous variables).
  JointTable counterfactual;

  // Column names of the two potential outcomes in `counterfactual`.
  static std::string treated_column() { return "Y(do x=1)"; }
  static std::string control_column() { return "Y(do x=0)"; }

  CausalQuantities quantities() const;
  // Per-stratum P(y_x|z), P(y_x'|z) and observational cells for covariates z.
  // Only meaningful when no member of z descends from x.
  std::vector<StratumQuantities> strata(std::span<const std::string> z) const;
};

// Exact enumeration of the exogenous space. x and y must be binary endogenous
// variables. Throws StateSpaceTooLarge, NonBinaryVariable, UnknownVariable.
CounterfactualProfile enumerate_counterfactuals(const ScmSpec& m, std::string_view x, std::string_view y,
                                                std::size_t max_states = std::size_t{1} << 24);

// Generator used for sampling and model generation; recorded in metadata.
inline constexpr std::string_view kPrngAlgorithm = "mt19937_64";

// Stream `stream` of a seed (splitmix64 finalizer over seed and stream).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

// n i.i.d. observational rows, single stream per seed. The generator name
// and seed are stored in the dataset metadata.
DiscreteDataset sample(const ScmSpec& m, std::size_t n, std::uint64_t seed);

enum class CovariateRole { Confounder, OutcomeOnly, Mixed };

struct RandomScmOptions {
  std::size_t covariates = 2;  // at most 4
  CovariateRole role = CovariateRole::Mixed;
  bool latent_confounding = false;  // shared exogenous parent of X and Y
  int denominator = 16;             // exogenous probabilities are k/denominator
};

// Binary model with covariates Z1..Zk (never descendants of X), treatment X
// and outcome Y. Every X row takes both values across X's exogenous inputs,
// so P(x|z) > 0 everywhere. Throws InvalidScm for more than 4 covariates.
ScmSpec random_scm(const RandomScmOptions& options, std::uint64_t seed);
std::vector<std::string> random_scm_covariates(const ScmSpec& m);

// Structured-text SCM file:
//   {"format": "pns-scm", "version": "v1", "seed": 7,
//    "exogenous": [{"name": "U", "probs": ["1/4", "3/4"]}],
//    "mechanisms": [{"name": "X", "levels": 2, "parents": [], "exogenous": ["U"],
//                    "rows": [[0, 0], [1, 1]]}]}
// Each row lists the input levels followed by the output level. Probabilities
// may be numbers or "a/b" strings.
std::string write_scm_json(const ScmSpec& m);
ScmSpec parse_scm_json(std::string_view text);
ScmSpec read_scm(const std::filesystem::path& path);

}  // namespace pnskit
