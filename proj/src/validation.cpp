#include "pnskit/validation.hpp"

#include <chrono>
#include <cstring>
#include <random>
#include <sstream>

#include "pnskit/error.hpp"
#include "pnskit/estimate.hpp"

namespace pnskit {

namespace {

struct Tally {
  std::size_t checks = 0;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

SuiteResult collect(std::string name, std::vector<Tally>& parts, const Timer& timer) {
  SuiteResult r;
  r.name = std::move(name);
  for (auto& t : parts) {
    r.checks += t.checks;
    r.violations += t.failures.size();
    for (auto& f : t.failures) {
      if (r.examples.size() < 5) r.examples.push_back(std::move(f));
    }
  }
  r.seconds = timer.seconds();
  return r;
}

std::string describe(std::size_t i, const ScmSpec& m, const std::string& what, double exact, const PnsInterval& iv) {
  std::ostringstream os;
  os.precision(17);
  os << "model " << i << " (seed " << (m.seed ? *m.seed : 0) << "): " << what << " exact " << exact << " not in ["
     << iv.lower << ", " << iv.upper << "]";
  return os.str();
}

bool well_formed(const PnsInterval& iv) { return 0.0 <= iv.lower && iv.lower <= iv.upper && iv.upper <= 1.0; }

std::vector<std::vector<std::string>> subsets(const std::vector<std::string>& items) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << items.size()); ++mask) {
    std::vector<std::string> s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (mask & (std::size_t{1} << i)) s.push_back(items[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

ScmSpec suite_model(const ValidationOptions& options, std::size_t i) {
  RandomScmOptions o;
  o.covariates = i % (options.max_covariates + 1);
  o.role = static_cast<CovariateRole>((i / (options.max_covariates + 1)) % 3);
  o.latent_confounding = i % 4 == 3;
  return random_scm(o, split_seed(options.base_seed, i));
}

CausalQuantities swap_labels(const CausalQuantities& q) {
  return CausalQuantities::from_joint(1.0 - q.p_yxp, 1.0 - q.p_yx, q.p_x_not_y_not, q.p_x_not_y, q.p_xy_not, q.p_xy);
}

SuiteResult containment_suite(const ValidationOptions& options) {
  const Timer timer;
  std::vector<Tally> parts(options.seeds);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < options.seeds; ++i) {
    Tally& t = parts[i];
    const ScmSpec m = suite_model(options, i);
    const auto prof = enumerate_counterfactuals(m, "X", "Y");
    const auto tp = tian_pearl_bounds(prof.quantities());
    t.check(well_formed(tp) && tp.contains(prof.exact_pns, options.tolerance), describe(i, m, "tp", prof.exact_pns, tp));
    const auto swapped = tian_pearl_bounds(swap_labels(prof.quantities()));
    t.check(well_formed(swapped) && swapped.contains(prof.exact_pns, options.tolerance),
            describe(i, m, "tp after label swap", prof.exact_pns, swapped));
  }
  return collect("containment", parts, timer);
}

SuiteResult covariate_suite(const ValidationOptions& options) {
  const Timer timer;
  std::vector<Tally> parts(options.seeds);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < options.seeds; ++i) {
    Tally& t = parts[i];
    const ScmSpec m = suite_model(options, i);
    const auto prof = enumerate_counterfactuals(m, "X", "Y");
    const auto tp = tian_pearl_bounds(prof.quantities());
    for (const auto& z : subsets(random_scm_covariates(m))) {
      const std::string zs = "Z={" + [&] {
        std::string s;
        for (const auto& v : z) s += (s.empty() ? "" : ",") + v;
        return s;
      }() + "}";
      const auto strata = prof.strata(z);
      const auto thm1 = covariate_bounds(strata);
      t.check(well_formed(thm1) && thm1.contains(prof.exact_pns, options.tolerance),
              describe(i, m, "thm1 " + zs, prof.exact_pns, thm1));
      t.check(thm1.lower >= tp.lower - options.tolerance && thm1.upper <= tp.upper + options.tolerance,
              describe(i, m, "thm1 wider than tp, " + zs, prof.exact_pns, thm1));
      if (!satisfies_backdoor(m.graph(), "X", "Y", NodeSet(z.begin(), z.end()))) continue;
      const auto thm2 = backdoor_bounds(prof.observational, {{"X", 1}}, {{"Y", 1}}, z);
      t.check(well_formed(thm2) && thm2.contains(prof.exact_pns, options.tolerance),
              describe(i, m, "thm2 " + zs, prof.exact_pns, thm2));
    }
  }
  return collect("covariate", parts, timer);
}

SuiteResult reduction_suite(const ValidationOptions& options) {
  const Timer timer;
  std::vector<Tally> parts(1);
  std::mt19937_64 rng(split_seed(options.base_seed, 0x7265647563ULL));
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t i = 0; i < options.reduction_vectors; ++i) {
    // Random joint over (X, Y under do(x), Y under do(x')).
    double cells[8], total = 0.0;
    for (double& c : cells) total += (c = uniform() + 1e-3);
    for (double& c : cells) c /= total;
    auto at = [&](int x, int y1, int y0) { return cells[x * 4 + y1 * 2 + y0]; };
    CausalQuantities q = CausalQuantities::from_joint(
        at(0, 1, 0) + at(0, 1, 1) + at(1, 1, 0) + at(1, 1, 1), at(0, 0, 1) + at(0, 1, 1) + at(1, 0, 1) + at(1, 1, 1),
        at(1, 1, 0) + at(1, 1, 1), at(1, 0, 0) + at(1, 0, 1), at(0, 0, 1) + at(0, 1, 1), at(0, 0, 0) + at(0, 1, 0));
    const auto tp = tian_pearl_bounds(q);
    const StratumQuantities one{"{}", 1.0, q};
    const auto thm1 = covariate_bounds(std::span(&one, 1));
    const bool same = std::memcmp(&tp.lower, &thm1.lower, sizeof(double)) == 0 &&
                      std::memcmp(&tp.upper, &thm1.upper, sizeof(double)) == 0 &&
                      tp.binding.front().lower_arg == thm1.binding.front().lower_arg &&
                      tp.binding.front().upper_arg == thm1.binding.front().upper_arg;
    std::ostringstream os;
    os.precision(17);
    os << "vector " << i << ": tp [" << tp.lower << ", " << tp.upper << "] vs thm1 [" << thm1.lower << ", " << thm1.upper
       << "]";
    parts[0].check(same, os.str());
  }
  return collect("reduction", parts, timer);
}

SuiteResult adjustment_suite(const ValidationOptions& options) {
  const Timer timer;
  std::vector<Tally> parts(options.seeds);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < options.seeds; ++i) {
    Tally& t = parts[i];
    const ScmSpec m = suite_model(options, i);
    const auto prof = enumerate_counterfactuals(m, "X", "Y");
    for (const auto& z : subsets(random_scm_covariates(m))) {
      if (!satisfies_backdoor(m.graph(), "X", "Y", NodeSet(z.begin(), z.end()))) continue;
      const double d1 = do_adjust(prof.observational, {{"X", 1}}, {{"Y", 1}}, z).value;
      const double d0 = do_adjust(prof.observational, {{"X", 0}}, {{"Y", 1}}, z).value;
      std::ostringstream os;
      os.precision(17);
      os << "model " << i << ": do(X=1) " << d1 << " vs " << prof.p_yx << ", do(X=0) " << d0 << " vs " << prof.p_yxp;
      t.check(std::abs(d1 - prof.p_yx) <= options.adjust_tolerance && std::abs(d0 - prof.p_yxp) <= options.adjust_tolerance,
              os.str());
    }
  }
  return collect("adjustment", parts, timer);
}

SuiteResult sampled_adjustment_suite(const ValidationOptions& options) {
  const Timer timer;
  std::vector<Tally> parts(options.sampled_seeds);
  std::vector<double> worst(options.sampled_seeds, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < options.sampled_seeds; ++i) {
    RandomScmOptions o;
    o.covariates = 1 + i % 2;
    o.role = CovariateRole::Confounder;
    const ScmSpec m = random_scm(o, split_seed(options.base_seed ^ 0x5351ULL, i));
    const auto prof = enumerate_counterfactuals(m, "X", "Y");
    const auto z = random_scm_covariates(m);
    std::ostringstream os;
    os.precision(6);
    os << "seed " << i << ": ";
    bool ok = false;
    try {
      const auto d = sample(m, options.sample_size, split_seed(options.base_seed, 1000000 + i));
      std::vector<std::string> vars = z;
      vars.push_back("X");
      vars.push_back("Y");
      const JointTable tab = tabulate(d, vars);
      const double d1 = do_adjust(tab, {{"X", 1}}, {{"Y", 1}}, z).value;
      const double d0 = do_adjust(tab, {{"X", 0}}, {{"Y", 1}}, z).value;
      worst[i] = std::max(std::abs(d1 - prof.p_yx), std::abs(d0 - prof.p_yxp));
      ok = worst[i] <= options.sampled_tolerance;
      os << "error " << worst[i];
    } catch (const Error& e) {
      os << e.what();
    }
    parts[i].check(ok, os.str());
  }
  SuiteResult r = collect("sampled-adjustment", parts, timer);
  const std::size_t passed = r.checks - r.violations;
  std::ostringstream note;
  note << passed << "/" << r.checks << " seeds within " << options.sampled_tolerance;
  r.note = note.str();
  // The suite tolerates a small fraction of sampling misses.
  const bool ok = static_cast<double>(passed) >= options.sampled_pass_rate * static_cast<double>(r.checks);
  if (ok) {
    r.violations = 0;
    r.examples.clear();
  }
  return r;
}

std::vector<SuiteResult> run_validation(const ValidationOptions& options, bool include_sampled) {
  std::vector<SuiteResult> out;
  out.push_back(containment_suite(options));
  out.push_back(covariate_suite(options));
  out.push_back(reduction_suite(options));
  out.push_back(adjustment_suite(options));
  if (include_sampled) out.push_back(sampled_adjustment_suite(options));
  return out;
}

}  // namespace pnskit
