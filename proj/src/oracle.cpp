#include "pnskit/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pnskit/error.hpp"
#include "pnskit/numeric.hpp"

namespace pnskit {

ScmSpec ScmSpec::build(std::vector<ExogenousVar> exogenous, std::vector<Mechanism> mechanisms) {
  std::unordered_map<std::string, std::size_t> exo_index, endo_index;
  for (std::size_t i = 0; i < exogenous.size(); ++i) {
    const auto& u = exogenous[i];
    if (u.name.empty()) throw Error(Errc::InvalidScm, "exogenous variable with empty name");
    if (!exo_index.emplace(u.name, i).second) throw Error(Errc::InvalidScm, "exogenous '" + u.name + "' declared twice");
    if (u.probs.empty()) throw Error(Errc::InvalidScm, "exogenous '" + u.name + "' has no levels");
    CompensatedSum s;
    for (double p : u.probs) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidScm, "exogenous '" + u.name + "' has a probability outside [0,1]");
      s.add(p);
    }
    if (std::abs(s.value() - 1.0) > kProbTolerance) {
      throw Error(Errc::InvalidScm, "probabilities of '" + u.name + "' sum to " + std::to_string(s.value()));
    }
  }
  for (std::size_t i = 0; i < mechanisms.size(); ++i) {
    const auto& m = mechanisms[i];
    if (m.name.empty()) throw Error(Errc::InvalidScm, "mechanism with empty name");
    if (exo_index.count(m.name) || !endo_index.emplace(m.name, i).second) {
      throw Error(Errc::InvalidScm, "variable '" + m.name + "' declared twice");
    }
    if (m.cardinality < 1) throw Error(Errc::InvalidScm, "'" + m.name + "' needs at least one level");
  }

  std::vector<std::string> nodes;
  std::vector<NamedEdge> edges;
  for (const auto& m : mechanisms) nodes.push_back(m.name);
  std::vector<std::size_t> exo_uses(exogenous.size(), 0);
  for (const auto& m : mechanisms) {
    for (const auto& e : m.exogenous) {
      auto it = exo_index.find(e);
      if (it == exo_index.end()) throw Error(Errc::InvalidScm, "'" + m.name + "' reads unknown exogenous '" + e + "'");
      ++exo_uses[it->second];
    }
  }
  for (std::size_t i = 0; i < exogenous.size(); ++i) {
    if (exo_uses[i] > 1) nodes.push_back(exogenous[i].name);
  }
  for (const auto& m : mechanisms) {
    std::unordered_set<std::string> seen;
    for (const auto& p : m.parents) {
      if (!endo_index.count(p)) throw Error(Errc::InvalidScm, "'" + m.name + "' has unknown parent '" + p + "'");
      if (!seen.insert(p).second) throw Error(Errc::InvalidScm, "'" + m.name + "' lists '" + p + "' twice");
      edges.emplace_back(p, m.name);
    }
    for (const auto& e : m.exogenous) {
      if (!seen.insert(e).second) throw Error(Errc::InvalidScm, "'" + m.name + "' lists '" + e + "' twice");
      if (exo_uses[exo_index.at(e)] > 1) edges.emplace_back(e, m.name);
    }
  }

  ScmSpec spec;
  spec.graph_ = CausalGraph::build(nodes, edges);
  for (std::size_t v : spec.graph_.topological_order()) {
    if (v < mechanisms.size()) spec.mech_.push_back(mechanisms[v]);
  }
  spec.exo_ = std::move(exogenous);
  std::unordered_map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < spec.mech_.size(); ++i) order[spec.mech_[i].name] = i;

  for (const auto& m : spec.mech_) {
    Wiring w;
    std::vector<std::size_t> cards;
    for (const auto& p : m.parents) {
      w.parents.push_back(order.at(p));
      cards.push_back(static_cast<std::size_t>(spec.mech_[order.at(p)].cardinality));
    }
    for (const auto& e : m.exogenous) {
      w.exogenous.push_back(exo_index.at(e));
      cards.push_back(spec.exo_[exo_index.at(e)].cardinality());
    }
    w.strides.assign(cards.size(), 1);
    std::size_t rows = 1;
    for (std::size_t i = cards.size(); i-- > 0;) {
      w.strides[i] = rows;
      if (rows > (std::size_t{1} << 24) / cards[i]) throw Error(Errc::InvalidScm, "truth table of '" + m.name + "' is too large");
      rows *= cards[i];
    }
    if (m.table.size() != rows) {
      throw Error(Errc::InvalidScm, "truth table of '" + m.name + "' has " + std::to_string(m.table.size()) +
                                        " rows, expected " + std::to_string(rows));
    }
    for (int v : m.table) {
      if (v < 0 || v >= m.cardinality) throw Error(Errc::InvalidScm, "truth table of '" + m.name + "' has level " + std::to_string(v));
    }
    spec.wiring_.push_back(std::move(w));
  }
  return spec;
}

const Mechanism& ScmSpec::mechanism(std::string_view name) const { return mech_[endogenous_index(name)]; }

std::size_t ScmSpec::endogenous_index(std::string_view name) const {
  for (std::size_t i = 0; i < mech_.size(); ++i) {
    if (mech_[i].name == name) return i;
  }
  throw Error(Errc::UnknownVariable, "'" + std::string(name) + "' is not an endogenous variable");
}

std::vector<std::string> ScmSpec::endogenous_names() const {
  std::vector<std::string> out;
  for (const auto& m : mech_) out.push_back(m.name);
  return out;
}

std::vector<std::string> ScmSpec::latent_nodes() const {
  std::vector<std::string> out;
  for (const auto& n : graph_.nodes()) {
    if (std::none_of(mech_.begin(), mech_.end(), [&](const Mechanism& m) { return m.name == n; })) out.push_back(n);
  }
  return out;
}

std::size_t ScmSpec::state_space() const {
  std::size_t s = 1;
  for (const auto& u : exo_) {
    if (s > std::numeric_limits<std::size_t>::max() / u.cardinality()) return std::numeric_limits<std::size_t>::max();
    s *= u.cardinality();
  }
  return s;
}

void ScmSpec::decode_state(std::size_t s, std::vector<int>& u) const {
  u.resize(exo_.size());
  for (std::size_t i = exo_.size(); i-- > 0;) {
    const std::size_t k = exo_[i].cardinality();
    u[i] = static_cast<int>(s % k);
    s /= k;
  }
}

double ScmSpec::state_probability(std::span<const int> u) const {
  double p = 1.0;
  for (std::size_t i = 0; i < exo_.size(); ++i) p *= exo_[i].probs[static_cast<std::size_t>(u[i])];
  return p;
}

void ScmSpec::evaluate(std::span<const int> u, std::vector<int>& out,
                       std::optional<std::pair<std::size_t, int>> intervention) const {
  out.resize(mech_.size());
  for (std::size_t i = 0; i < mech_.size(); ++i) {
    if (intervention && intervention->first == i) {
      out[i] = intervention->second;
      continue;
    }
    const Wiring& w = wiring_[i];
    std::size_t row = 0, k = 0;
    for (std::size_t p : w.parents) row += static_cast<std::size_t>(out[p]) * w.strides[k++];
    for (std::size_t e : w.exogenous) row += static_cast<std::size_t>(u[e]) * w.strides[k++];
    out[i] = mech_[i].table[row];
  }
}

CausalQuantities CounterfactualProfile::quantities() const {
  auto cell = [&](int xv, int yv) { return observational.count({{x, xv}, {y, yv}}) / observational.total(); };
  return CausalQuantities::from_joint(p_yx, p_yxp, cell(1, 1), cell(1, 0), cell(0, 1), cell(0, 0));
}

std::vector<StratumQuantities> CounterfactualProfile::strata(std::span<const std::string> z) const {
  std::vector<StratumQuantities> out;
  const double total = counterfactual.total();
  for (const Event& zv : counterfactual.assignments(z)) {
    const double w = counterfactual.count(zv);
    if (w == 0.0) continue;
    auto with = [&](Event e) {
      e.insert(zv.begin(), zv.end());
      return counterfactual.count(e) / w;
    };
    StratumQuantities s;
    s.label = zv.empty() ? std::string("{}") : format_event(zv);
    s.weight = w / total;
    s.quantities = CausalQuantities::from_joint(with({{treated_column(), 1}}), with({{control_column(), 1}}),
                                                with({{x, 1}, {y, 1}}), with({{x, 1}, {y, 0}}),
                                                with({{x, 0}, {y, 1}}), with({{x, 0}, {y, 0}}));
    out.push_back(std::move(s));
  }
  return out;
}

CounterfactualProfile enumerate_counterfactuals(const ScmSpec& m, std::string_view x, std::string_view y,
                                                std::size_t max_states) {
  const std::size_t xi = m.endogenous_index(x);
  const std::size_t yi = m.endogenous_index(y);
  if (xi == yi) throw Error(Errc::InvalidConfig, "treatment and outcome are the same variable");
  for (std::size_t i : {xi, yi}) {
    if (m.mechanisms()[i].cardinality != 2) {
      throw Error(Errc::NonBinaryVariable, "'" + m.mechanisms()[i].name + "' has " +
                                               std::to_string(m.mechanisms()[i].cardinality) + " levels");
    }
  }
  const std::size_t states = m.state_space();
  if (states > max_states) {
    throw Error(Errc::StateSpaceTooLarge, "exogenous space has " +
                                              (states == std::numeric_limits<std::size_t>::max() ? std::string("too many")
                                                                                                  : std::to_string(states)) +
                                              " states (cap " + std::to_string(max_states) + ")");
  }

  std::vector<DiscreteVariable> vars;
  for (const auto& mech : m.mechanisms()) {
    DiscreteVariable v{mech.name, {}, false};
    for (int l = 0; l < mech.cardinality; ++l) v.levels.push_back(l);
    vars.push_back(std::move(v));
  }
  std::size_t obs_cells = 1;
  for (const auto& v : vars) {
    if (obs_cells > JointTable::kMaxCells / (4 * v.cardinality())) {
      throw Error(Errc::TableTooLarge, "endogenous joint is too large to tabulate");
    }
    obs_cells *= v.cardinality();
  }

  // Fixed partition of the state space, independent of the thread count;
  // chunks are reduced in index order so the result is reproducible.
  const std::size_t max_chunks = std::max<std::size_t>(1, std::min<std::size_t>(64, (std::size_t{1} << 26) / (4 * obs_cells)));
  const std::size_t chunks = std::min(states, max_chunks);
  const std::size_t per_chunk = (states + chunks - 1) / chunks;
  std::vector<std::vector<double>> partial(chunks);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < chunks; ++c) {
    std::vector<double> acc(4 * obs_cells, 0.0);
    std::vector<int> u, obs, treated, control;
    const std::size_t end = std::min(states, (c + 1) * per_chunk);
    for (std::size_t s = c * per_chunk; s < end; ++s) {
      m.decode_state(s, u);
      const double p = m.state_probability(u);
      if (p == 0.0) continue;
      m.evaluate(u, obs);
      m.evaluate(u, treated, std::pair{xi, 1});
      m.evaluate(u, control, std::pair{xi, 0});
      std::size_t cell = 0;
      for (std::size_t v = 0; v < obs.size(); ++v) cell = cell * vars[v].cardinality() + static_cast<std::size_t>(obs[v]);
      cell += obs_cells * (static_cast<std::size_t>(treated[yi]) * 2 + static_cast<std::size_t>(control[yi]));
      acc[cell] += p;
    }
    partial[c] = std::move(acc);
  }

  std::vector<double> cf(4 * obs_cells, 0.0);
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < cf.size(); ++i) cf[i] += part[i];
  }
  std::vector<double> obs(obs_cells, 0.0);
  for (std::size_t i = 0; i < cf.size(); ++i) obs[i % obs_cells] += cf[i];

  CounterfactualProfile prof;
  prof.x = std::string(x);
  prof.y = std::string(y);
  prof.states = states;
  std::vector<DiscreteVariable> cf_vars{{CounterfactualProfile::treated_column(), {0, 1}, false},
                                        {CounterfactualProfile::control_column(), {0, 1}, false}};
  cf_vars.insert(cf_vars.end(), vars.begin(), vars.end());
  prof.counterfactual = JointTable(std::move(cf_vars), std::move(cf));
  prof.observational = JointTable(std::move(vars), std::move(obs));
  const double total = prof.counterfactual.total();
  prof.p_yx = prof.counterfactual.count({{CounterfactualProfile::treated_column(), 1}}) / total;
  prof.p_yxp = prof.counterfactual.count({{CounterfactualProfile::control_column(), 1}}) / total;
  prof.exact_pns =
      prof.counterfactual.count({{CounterfactualProfile::treated_column(), 1}, {CounterfactualProfile::control_column(), 0}}) /
      total;
  return prof;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t bounded(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

}  // namespace

DiscreteDataset sample(const ScmSpec& m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& exo = m.exogenous();
  std::vector<std::vector<double>> cdf;
  for (const auto& e : exo) {
    std::vector<double> c;
    double acc = 0.0;
    for (double p : e.probs) c.push_back(acc += p);
    cdf.push_back(std::move(c));
  }
  std::vector<std::vector<int>> cols(m.mechanisms().size(), std::vector<int>(n));
  std::vector<int> u(exo.size()), out;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < exo.size(); ++i) {
      const double draw = uniform01(rng);
      std::size_t level = 0;
      while (level + 1 < cdf[i].size() && !(draw < cdf[i][level])) ++level;
      // Skip zero-probability levels that share a cumulative value.
      while (exo[i].probs[level] == 0.0 && level > 0) --level;
      u[i] = static_cast<int>(level);
    }
    m.evaluate(u, out);
    for (std::size_t v = 0; v < out.size(); ++v) cols[v][r] = out[v];
  }
  std::vector<DiscreteVariable> vars;
  for (const auto& mech : m.mechanisms()) {
    DiscreteVariable v{mech.name, {}, false};
    for (int l = 0; l < mech.cardinality; ++l) v.levels.push_back(l);
    vars.push_back(std::move(v));
  }
  DiscreteDataset d(std::move(vars), std::move(cols));
  d.metadata["generator"] = "scm_oracle.sample";
  d.metadata["prng"] = std::string(kPrngAlgorithm);
  d.metadata["seed"] = std::to_string(seed);
  if (m.seed) d.metadata["scm_seed"] = std::to_string(*m.seed);
  return d;
}

namespace {

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t k, int denominator) {
  // k-1 distinct cut points in 1..denominator-1.
  std::vector<int> points;
  for (int i = 1; i < denominator; ++i) points.push_back(i);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    std::swap(points[i], points[i + bounded(rng, points.size() - i)]);
  }
  std::vector<int> cuts(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(k - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(denominator);
  std::vector<double> probs;
  int prev = 0;
  for (int c : cuts) {
    probs.push_back(static_cast<double>(c - prev) / denominator);
    prev = c;
  }
  return probs;
}

std::vector<int> random_table(std::mt19937_64& rng, std::size_t rows) {
  std::vector<int> t(rows);
  for (auto& v : t) v = static_cast<int>(bounded(rng, 2));
  return t;
}

}  // namespace

ScmSpec random_scm(const RandomScmOptions& options, std::uint64_t seed) {
  if (options.covariates > 4) throw Error(Errc::InvalidScm, "at most 4 covariates are supported");
  if (options.denominator < 4) throw Error(Errc::InvalidScm, "denominator must be at least 4");
  std::mt19937_64 rng(seed);
  std::vector<ExogenousVar> exo;
  std::vector<Mechanism> mech;
  auto add_exo = [&](const std::string& name, std::size_t k) {
    exo.push_back({name, random_probs(rng, k, options.denominator)});
    return k;
  };

  Mechanism x{"X", 2, {}, {}, {}};
  Mechanism y{"Y", 2, {"X"}, {}, {}};
  for (std::size_t i = 1; i <= options.covariates; ++i) {
    const std::string name = "Z" + std::to_string(i);
    Mechanism z{name, 2, {}, {"U_" + name}, {}};
    for (const auto& prev : mech) {
      if (bounded(rng, 2)) z.parents.push_back(prev.name);
    }
    const std::size_t k = add_exo("U_" + name, 2 + bounded(rng, 2));
    z.table = random_table(rng, (std::size_t{1} << z.parents.size()) * k);
    mech.push_back(std::move(z));

    int role = 0;  // 0 confounder, 1 outcome only, 2 treatment only
    if (options.role == CovariateRole::OutcomeOnly) role = 1;
    if (options.role == CovariateRole::Mixed) role = static_cast<int>(bounded(rng, 3));
    if (role != 1) x.parents.push_back(name);
    if (role != 2) y.parents.push_back(name);
  }

  std::size_t x_states = add_exo("U_X", 2 + bounded(rng, 3));
  x.exogenous.push_back("U_X");
  std::size_t y_states = add_exo("U_Y", 2 + bounded(rng, 3));
  y.exogenous.push_back("U_Y");
  if (options.latent_confounding) {
    const std::size_t k = add_exo("U_XY", 2 + bounded(rng, 2));
    x.exogenous.push_back("U_XY");
    y.exogenous.push_back("U_XY");
    x_states *= k;
    y_states *= k;
  }

  const std::size_t x_configs = std::size_t{1} << x.parents.size();
  x.table = random_table(rng, x_configs * x_states);
  for (std::size_t c = 0; c < x_configs; ++c) {
    auto first = x.table.begin() + static_cast<std::ptrdiff_t>(c * x_states);
    auto last = first + static_cast<std::ptrdiff_t>(x_states);
    if (std::all_of(first, last, [&](int v) { return v == *first; })) {
      auto flip = first + static_cast<std::ptrdiff_t>(bounded(rng, x_states));
      *flip = 1 - *flip;
    }
  }
  y.table = random_table(rng, (std::size_t{1} << y.parents.size()) * y_states);
  mech.push_back(std::move(x));
  mech.push_back(std::move(y));

  ScmSpec spec = ScmSpec::build(std::move(exo), std::move(mech));
  spec.seed = seed;
  static constexpr const char* kRoles[] = {"confounder", "outcome-only", "mixed"};
  spec.description = "random binary SCM, " + std::to_string(options.covariates) + " covariates, role " +
                     kRoles[static_cast<int>(options.role)] + (options.latent_confounding ? ", latent X-Y confounder" : "");
  return spec;
}

std::vector<std::string> random_scm_covariates(const ScmSpec& m) {
  std::vector<std::string> out;
  for (const auto& mech : m.mechanisms()) {
    if (mech.name != "X" && mech.name != "Y") out.push_back(mech.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using nlohmann::json;

double parse_probability(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw Error(Errc::InvalidScm, "probability must be a number or \"a/b\"");
  const auto s = j.get<std::string>();
  const auto slash = s.find('/');
  auto number = [&](std::string_view part) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw Error(Errc::InvalidScm, "unreadable probability '" + s + "'");
    }
    return v;
  };
  if (slash == std::string::npos) return number(s);
  const double den = number(std::string_view(s).substr(slash + 1));
  if (den == 0.0) throw Error(Errc::InvalidScm, "zero denominator in '" + s + "'");
  return number(std::string_view(s).substr(0, slash)) / den;
}

json format_probability(double p) {
  for (double den = 1; den <= (1ULL << 40); den *= 2) {
    const double num = p * den;
    if (num == std::floor(num) && num / den == p) {
      return std::to_string(static_cast<long long>(num)) + "/" + std::to_string(static_cast<long long>(den));
    }
  }
  for (int den = 3; den <= 1000; ++den) {
    const double num = std::round(p * den);
    if (num / den == p) return std::to_string(static_cast<long long>(num)) + "/" + std::to_string(den);
  }
  return p;
}

}  // namespace

std::string write_scm_json(const ScmSpec& m) {
  json doc;
  doc["format"] = "pns-scm";
  doc["version"] = "v1";
  if (m.seed) doc["seed"] = *m.seed;
  if (!m.description.empty()) doc["description"] = m.description;
  doc["exogenous"] = json::array();
  for (const auto& u : m.exogenous()) {
    json probs = json::array();
    for (double p : u.probs) probs.push_back(format_probability(p));
    doc["exogenous"].push_back({{"name", u.name}, {"probs", probs}});
  }
  doc["mechanisms"] = json::array();
  for (const auto& mech : m.mechanisms()) {
    std::vector<std::size_t> cards;
    for (const auto& p : mech.parents) cards.push_back(static_cast<std::size_t>(m.mechanism(p).cardinality));
    for (const auto& e : mech.exogenous) {
      for (const auto& u : m.exogenous()) {
        if (u.name == e) cards.push_back(u.cardinality());
      }
    }
    json rows = json::array();
    std::vector<int> in(cards.size(), 0);
    for (int out : mech.table) {
      json row(in);
      row.push_back(out);
      rows.push_back(std::move(row));
      for (std::size_t i = cards.size(); i-- > 0;) {
        if (static_cast<std::size_t>(++in[i]) < cards[i]) break;
        in[i] = 0;
      }
    }
    doc["mechanisms"].push_back({{"name", mech.name},
                                 {"levels", mech.cardinality},
                                 {"parents", mech.parents},
                                 {"exogenous", mech.exogenous},
                                 {"rows", rows}});
  }
  return doc.dump(2) + "\n";
}

ScmSpec parse_scm_json(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    if (doc.contains("format") && doc.at("format") != "pns-scm") throw Error(Errc::InvalidScm, "not an SCM file");
    if (doc.contains("version") && doc.at("version") != "v1") {
      throw Error(Errc::UnsupportedVersion, "SCM file version " + doc.at("version").dump());
    }
    std::vector<ExogenousVar> exo;
    std::unordered_map<std::string, std::size_t> exo_card;
    for (const auto& j : doc.at("exogenous")) {
      ExogenousVar u{j.at("name").get<std::string>(), {}};
      for (const auto& p : j.at("probs")) u.probs.push_back(parse_probability(p));
      exo_card[u.name] = u.cardinality();
      exo.push_back(std::move(u));
    }
    std::unordered_map<std::string, int> endo_card;
    for (const auto& j : doc.at("mechanisms")) endo_card[j.at("name").get<std::string>()] = j.value("levels", 2);

    std::vector<Mechanism> mech;
    for (const auto& j : doc.at("mechanisms")) {
      Mechanism mc;
      mc.name = j.at("name").get<std::string>();
      mc.cardinality = j.value("levels", 2);
      mc.parents = j.value("parents", std::vector<std::string>{});
      mc.exogenous = j.value("exogenous", std::vector<std::string>{});
      std::vector<std::size_t> cards;
      for (const auto& p : mc.parents) {
        auto it = endo_card.find(p);
        if (it == endo_card.end()) throw Error(Errc::InvalidScm, "'" + mc.name + "' has unknown parent '" + p + "'");
        cards.push_back(static_cast<std::size_t>(std::max(it->second, 1)));
      }
      for (const auto& e : mc.exogenous) {
        auto it = exo_card.find(e);
        if (it == exo_card.end()) throw Error(Errc::InvalidScm, "'" + mc.name + "' reads unknown exogenous '" + e + "'");
        cards.push_back(it->second);
      }
      std::size_t rows = 1;
      for (std::size_t c : cards) rows *= c;
      mc.table.assign(rows, -1);
      for (const auto& row : j.at("rows")) {
        const auto cells = row.get<std::vector<int>>();
        if (cells.size() != cards.size() + 1) {
          throw Error(Errc::InvalidScm, "row of '" + mc.name + "' needs " + std::to_string(cards.size() + 1) + " entries");
        }
        std::size_t idx = 0;
        for (std::size_t i = 0; i < cards.size(); ++i) {
          if (cells[i] < 0 || static_cast<std::size_t>(cells[i]) >= cards[i]) {
            throw Error(Errc::InvalidScm, "row of '" + mc.name + "' has an input outside its domain");
          }
          idx = idx * cards[i] + static_cast<std::size_t>(cells[i]);
        }
        if (mc.table[idx] != -1) throw Error(Errc::InvalidScm, "row of '" + mc.name + "' repeats an input assignment");
        mc.table[idx] = cells.back();
        if (cells.back() < 0) throw Error(Errc::InvalidScm, "row of '" + mc.name + "' has a negative output");
      }
      if (std::find(mc.table.begin(), mc.table.end(), -1) != mc.table.end()) {
        throw Error(Errc::InvalidScm, "truth table of '" + mc.name + "' is not total");
      }
      mech.push_back(std::move(mc));
    }
    ScmSpec spec = ScmSpec::build(std::move(exo), std::move(mech));
    if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.description = doc.value("description", "");
    return spec;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidScm, e.what());
  }
}

ScmSpec read_scm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open SCM file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scm_json(buf.str());
}

}  // namespace pnskit
