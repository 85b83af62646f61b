#include "pnskit/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pnskit/error.hpp"
#include "pnskit/numeric.hpp"

namespace pnskit {

CausalQuantities CausalQuantities::from_joint(double p_yx, double p_yxp, double xy, double xy_not, double x_not_y,
                                              double x_not_y_not) {
  return CausalQuantities{p_yx, p_yxp, xy, xy_not, x_not_y, x_not_y_not, xy + x_not_y};
}

void CausalQuantities::validate() const {
  const std::array<std::pair<const char*, double>, 7> fields{{{"P(y_x)", p_yx},
                                                              {"P(y_x')", p_yxp},
                                                              {"P(x,y)", p_xy},
                                                              {"P(x,y')", p_xy_not},
                                                              {"P(x',y)", p_x_not_y},
                                                              {"P(x',y')", p_x_not_y_not},
                                                              {"P(y)", p_y}}};
  for (const auto& [name, v] : fields) {
    if (!(v >= -kQuantityTolerance && v <= 1.0 + kQuantityTolerance)) {
      throw Error(Errc::InvalidQuantities, std::string(name) + " = " + std::to_string(v) + " is outside [0,1]");
    }
  }
  const double total = p_xy + p_xy_not + p_x_not_y + p_x_not_y_not;
  if (std::abs(total - 1.0) > kQuantityTolerance) {
    throw Error(Errc::InvalidQuantities, "joint cells sum to " + std::to_string(total) + ", not 1");
  }
  if (std::abs(p_y - (p_xy + p_x_not_y)) > kQuantityTolerance) {
    throw Error(Errc::InvalidQuantities, "P(y) differs from P(x,y) + P(x',y)");
  }
}

std::string_view method_tag(BoundMethod m) {
  switch (m) {
    case BoundMethod::TianPearl: return "tp";
    case BoundMethod::Covariate: return "thm1";
    case BoundMethod::Backdoor: return "thm2";
  }
  return "?";
}

BoundMethod parse_method_tag(std::string_view tag) {
  if (tag == "tp") return BoundMethod::TianPearl;
  if (tag == "thm1") return BoundMethod::Covariate;
  if (tag == "thm2") return BoundMethod::Backdoor;
  throw Error(Errc::InvalidConfig, "unknown bound method '" + std::string(tag) + "'");
}

std::string_view lower_term_name(BoundMethod m, int arg) {
  static constexpr std::array<std::string_view, 4> tp{"0", "P(y_x)-P(y_x')", "P(y)-P(y_x')", "P(y_x)-P(y)"};
  static constexpr std::array<std::string_view, 2> bd{"0", "P(y|x,z)-P(y|x',z)"};
  if (m == BoundMethod::Backdoor) return bd.at(static_cast<std::size_t>(arg));
  return tp.at(static_cast<std::size_t>(arg));
}

std::string_view upper_term_name(BoundMethod m, int arg) {
  static constexpr std::array<std::string_view, 4> tp{"P(y_x)", "P(y'_x')", "P(x,y)+P(x',y')",
                                                      "P(y_x)-P(y_x')+P(x,y')+P(x',y)"};
  static constexpr std::array<std::string_view, 2> bd{"P(y|x,z)", "P(y'|x',z)"};
  if (m == BoundMethod::Backdoor) return bd.at(static_cast<std::size_t>(arg));
  return tp.at(static_cast<std::size_t>(arg));
}

namespace {

struct Terms {
  double lower;
  double upper;
  int lower_arg;
  int upper_arg;
};

template <std::size_t N>
std::pair<double, int> arg_max(const std::array<double, N>& v) {
  int best = 0;
  for (std::size_t i = 1; i < N; ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return {v[best], best};
}

template <std::size_t N>
std::pair<double, int> arg_min(const std::array<double, N>& v) {
  int best = 0;
  for (std::size_t i = 1; i < N; ++i) {
    if (v[i] < v[best]) best = static_cast<int>(i);
  }
  return {v[best], best};
}

Terms tp_terms(const CausalQuantities& q, const std::string& where) {
  q.validate();
  const std::array<double, 4> lo{0.0, q.p_yx - q.p_yxp, q.p_y - q.p_yxp, q.p_yx - q.p_y};
  const std::array<double, 4> hi{q.p_yx, 1.0 - q.p_yxp, q.p_xy + q.p_x_not_y_not,
                                 q.p_yx - q.p_yxp + q.p_xy_not + q.p_x_not_y};
  const auto [l, la] = arg_max(lo);
  const auto [u, ua] = arg_min(hi);
  if (l > u + kQuantityTolerance) {
    throw Error(Errc::InvalidQuantities, "experimental and observational inputs are incompatible" + where +
                                             " (lower " + std::to_string(l) + " > upper " + std::to_string(u) + ")");
  }
  return {l, u, la, ua};
}

// Clamps accumulated bounds into [0,1] and removes round-off crossings.
void finish(PnsInterval& out) {
  out.lower = std::clamp(out.lower, 0.0, 1.0);
  out.upper = std::clamp(out.upper, 0.0, 1.0);
  if (out.lower > out.upper) out.upper = out.lower;
}

std::string stratum_label(const Event& z) { return z.empty() ? std::string("{}") : format_event(z); }

}  // namespace

PnsInterval tian_pearl_bounds(const CausalQuantities& q) {
  const Terms t = tp_terms(q, "");
  PnsInterval out;
  out.method = BoundMethod::TianPearl;
  out.lower = t.lower;
  out.upper = t.upper;
  out.binding.push_back({"{}", t.lower_arg, t.upper_arg});
  finish(out);
  return out;
}

PnsInterval covariate_bounds(std::span<const StratumQuantities> strata) {
  if (strata.empty()) throw Error(Errc::WeightMismatch, "no strata");
  CompensatedSum weight;
  for (const auto& s : strata) {
    if (!(s.weight >= 0.0)) throw Error(Errc::WeightMismatch, "stratum " + s.label + " has negative weight");
    weight.add(s.weight);
  }
  if (std::abs(weight.value() - 1.0) > kQuantityTolerance) {
    throw Error(Errc::WeightMismatch, "stratum weights sum to " + std::to_string(weight.value()));
  }

  PnsInterval out;
  out.method = BoundMethod::Covariate;
  CompensatedSum lower, upper;
  for (const auto& s : strata) {
    if (s.weight == 0.0) continue;
    const Terms t = tp_terms(s.quantities, " in stratum " + s.label);
    lower.add(t.lower * s.weight);
    upper.add(t.upper * s.weight);
    out.binding.push_back({s.label, t.lower_arg, t.upper_arg});
  }
  out.lower = lower.value();
  out.upper = upper.value();
  finish(out);
  return out;
}

namespace {

struct ArmRates {
  double p_y_x;          // P(y | x, z)
  double p_y_x_not;      // P(y | x', z)
  double p_ynot_x_not;   // P(y' | x', z)
};

ArmRates arm_rates(const BinaryStratum& s, const Event& x) {
  const double nx = s.xy + s.xy_not;
  const double nxp = s.x_not_y + s.x_not_y_not;
  if (nx == 0.0 || nxp == 0.0) {
    throw Error(Errc::PositivityViolation, "stratum " + stratum_label(s.z) + " has no rows with " +
                                               (nx == 0.0 ? format_event(x) : "the other level of " + x.begin()->first));
  }
  return {s.xy / nx, s.x_not_y / nxp, s.x_not_y_not / nxp};
}

}  // namespace

PnsInterval backdoor_bounds(const JointTable& t, const Event& x, const Event& y, std::span<const std::string> z) {
  const auto strata = binary_strata(t, x, y, z);
  double total = 0.0;
  for (const auto& s : strata) total += s.n;

  PnsInterval out;
  out.method = BoundMethod::Backdoor;
  CompensatedSum lower, upper;
  for (const auto& s : strata) {
    const ArmRates r = arm_rates(s, x);
    const double w = s.n / total;
    const auto [l, la] = arg_max(std::array<double, 2>{0.0, r.p_y_x - r.p_y_x_not});
    const auto [u, ua] = arg_min(std::array<double, 2>{r.p_y_x, r.p_ynot_x_not});
    lower.add(l * w);
    upper.add(u * w);
    out.binding.push_back({stratum_label(s.z), la, ua});
  }
  out.lower = lower.value();
  out.upper = upper.value();
  finish(out);
  return out;
}

std::vector<StratumQuantities> adjusted_strata(const JointTable& t, const Event& x, const Event& y,
                                               std::span<const std::string> z) {
  const auto strata = binary_strata(t, x, y, z);
  double total = 0.0;
  for (const auto& s : strata) total += s.n;

  std::vector<StratumQuantities> out;
  for (const auto& s : strata) {
    const ArmRates r = arm_rates(s, x);
    StratumQuantities q;
    q.label = stratum_label(s.z);
    q.weight = s.n / total;
    q.quantities = CausalQuantities::from_joint(r.p_y_x, r.p_y_x_not, s.xy / s.n, s.xy_not / s.n, s.x_not_y / s.n,
                                                s.x_not_y_not / s.n);
    out.push_back(std::move(q));
  }
  return out;
}

PnsReport pns_report(const DiscreteDataset& d, const CausalGraph* graph, const Event& x, const Event& y,
                     const PnsReportOptions& options) {
  if (x.size() != 1 || y.size() != 1) throw Error(Errc::InvalidConfig, "x and y must each name one variable");
  const std::string xv = x.begin()->first;
  const std::string yv = y.begin()->first;

  PnsReport rep;
  if (options.policy == AdjustmentPolicy::Explicit) {
    rep.z = options.explicit_set;
    if (graph) {
      bool known = graph->contains(xv) && graph->contains(yv);
      for (const auto& v : rep.z) known = known && graph->contains(v);
      if (known) {
        rep.z_checked = true;
        rep.z_admissible = satisfies_backdoor(*graph, xv, yv, rep.z);
      }
    }
  } else {
    if (!graph) throw Error(Errc::NoAdmissibleSet, "no graph given to search for an adjustment set");
    if (!graph->contains(xv) || !graph->contains(yv)) {
      throw Error(Errc::NoAdmissibleSet, "graph does not contain both '" + xv + "' and '" + yv + "'");
    }
    auto sets = find_backdoor_sets(*graph, xv, yv, options.max_set_size);
    if (sets.empty()) {
      throw Error(Errc::NoAdmissibleSet, "no backdoor set of size <= " + std::to_string(options.max_set_size) + " for (" +
                                             xv + ", " + yv + ")");
    }
    rep.z = sets.front();
    rep.z_checked = true;
    rep.z_admissible = true;
    if (options.all_minimal_sets) {
      for (std::size_t i = 1; i < sets.size(); ++i) rep.alternatives.push_back({sets[i], {}});
    }
  }

  const std::vector<std::string> z(rep.z.begin(), rep.z.end());
  std::vector<std::string> vars = z;
  vars.push_back(xv);
  vars.push_back(yv);
  const JointTable t = tabulate(d, vars);
  rep.n = t.total();
  rep.excluded_rows = t.excluded_rows();

  const Event xp = complement(t, x);
  const Event yp = complement(t, y);
  rep.do_x = do_adjust(t, x, y, z);
  rep.do_x_not = do_adjust(t, xp, y, z);

  auto cell = [&](const Event& a, const Event& b) {
    Event e = a;
    e.insert(b.begin(), b.end());
    return t.count(e) / t.total();
  };
  rep.quantities = CausalQuantities::from_joint(rep.do_x.value, rep.do_x_not.value, cell(x, y), cell(x, yp),
                                                cell(xp, y), cell(xp, yp));
  rep.tp = tian_pearl_bounds(rep.quantities);
  rep.strata = adjusted_strata(t, x, y, z);
  rep.thm1 = covariate_bounds(rep.strata);
  rep.thm2 = backdoor_bounds(t, x, y, z);

  for (auto& alt : rep.alternatives) {
    const std::vector<std::string> az(alt.z.begin(), alt.z.end());
    std::vector<std::string> avars = az;
    avars.push_back(xv);
    avars.push_back(yv);
    alt.backdoor = backdoor_bounds(tabulate(d, avars), x, y, az);
  }
  return rep;
}

}  // namespace pnskit
