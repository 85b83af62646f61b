#include "pnskit/reference.hpp"

#include <algorithm>

#include "pnskit/error.hpp"

namespace pnskit::reference {

namespace {

void extend(const CausalGraph& g, std::size_t target, std::vector<std::size_t>& path, std::vector<bool>& on_path,
            std::vector<std::vector<std::size_t>>& out) {
  const std::size_t v = path.back();
  if (v == target) {
    out.push_back(path);
    return;
  }
  std::vector<std::size_t> next(g.parents(v));
  next.insert(next.end(), g.children(v).begin(), g.children(v).end());
  std::sort(next.begin(), next.end());
  for (std::size_t w : next) {
    if (on_path[w]) continue;
    on_path[w] = true;
    path.push_back(w);
    extend(g, target, path, on_path, out);
    path.pop_back();
    on_path[w] = false;
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> simple_paths(const CausalGraph& g, std::size_t a, std::size_t b) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> path{a};
  std::vector<bool> on_path(g.size(), false);
  on_path[a] = true;
  extend(g, b, path, on_path, out);
  return out;
}

bool path_blocked(const CausalGraph& g, std::span<const std::size_t> path, const std::vector<bool>& in_z) {
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const std::size_t prev = path[i - 1], mid = path[i], next = path[i + 1];
    const bool collider = g.has_edge(prev, mid) && g.has_edge(next, mid);
    if (!collider) {
      if (in_z[mid]) return true;
      continue;
    }
    bool open = in_z[mid];
    for (const auto& d : g.descendants(g.name(mid))) open = open || in_z[g.index(d)];
    if (!open) return true;
  }
  return false;
}

bool d_separated_paths(const CausalGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& z) {
  std::vector<bool> in_z(g.size(), false);
  for (const auto& v : z) in_z[g.index(v)] = true;
  for (const auto& s : a) {
    for (const auto& t : b) {
      if (s == t) throw Error(Errc::OverlappingSets, "'" + s + "' is in both A and B");
      for (const auto& path : simple_paths(g, g.index(s), g.index(t))) {
        if (!path_blocked(g, path, in_z)) return false;
      }
    }
  }
  return true;
}

JointTable tabulate_serial(const DiscreteDataset& d, std::span<const std::string> vars) {
  std::vector<std::size_t> idx;
  std::vector<DiscreteVariable> table_vars;
  for (const auto& v : vars) {
    idx.push_back(d.index_of(v));
    table_vars.push_back(d.variable(idx.back()));
    table_vars.back().allows_missing = false;
  }
  std::size_t cells = 1;
  for (const auto& v : table_vars) cells *= v.cardinality();
  std::vector<double> counts(cells, 0.0);
  std::size_t excluded = 0;
  for (std::size_t r = 0; r < d.n(); ++r) {
    std::size_t cell = 0;
    bool missing = false;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const int level = d.at(r, idx[i]);
      if (level == kMissingLevel) {
        missing = true;
        break;
      }
      cell = cell * table_vars[i].cardinality() + table_vars[i].level_index(level);
    }
    if (missing) {
      ++excluded;
    } else {
      counts[cell] += 1.0;
    }
  }
  if (excluded == d.n()) throw Error(Errc::EmptyTable, "no complete rows to tabulate");
  return JointTable(std::move(table_vars), std::move(counts), excluded);
}

CounterfactualProfile enumerate_serial(const ScmSpec& m, std::string_view x, std::string_view y) {
  const std::size_t xi = m.endogenous_index(x);
  const std::size_t yi = m.endogenous_index(y);
  if (m.mechanisms()[xi].cardinality != 2 || m.mechanisms()[yi].cardinality != 2) {
    throw Error(Errc::NonBinaryVariable, "treatment and outcome must be binary");
  }
  std::vector<DiscreteVariable> vars;
  std::size_t cells = 1;
  for (const auto& mech : m.mechanisms()) {
    DiscreteVariable v{mech.name, {}, false};
    for (int l = 0; l < mech.cardinality; ++l) v.levels.push_back(l);
    cells *= v.cardinality();
    vars.push_back(std::move(v));
  }
  std::vector<double> obs(cells, 0.0), cf(4 * cells, 0.0);
  CounterfactualProfile prof;
  prof.x = std::string(x);
  prof.y = std::string(y);
  prof.states = m.state_space();
  std::vector<int> u, base, treated, control;
  for (std::size_t s = 0; s < prof.states; ++s) {
    m.decode_state(s, u);
    const double p = m.state_probability(u);
    m.evaluate(u, base);
    m.evaluate(u, treated, std::pair{xi, 1});
    m.evaluate(u, control, std::pair{xi, 0});
    std::size_t cell = 0;
    for (std::size_t v = 0; v < base.size(); ++v) cell = cell * vars[v].cardinality() + static_cast<std::size_t>(base[v]);
    obs[cell] += p;
    cf[(static_cast<std::size_t>(treated[yi]) * 2 + static_cast<std::size_t>(control[yi])) * cells + cell] += p;
    if (treated[yi] == 1) prof.p_yx += p;
    if (control[yi] == 1) prof.p_yxp += p;
    if (treated[yi] == 1 && control[yi] == 0) prof.exact_pns += p;
  }
  std::vector<DiscreteVariable> cf_vars{{CounterfactualProfile::treated_column(), {0, 1}, false},
                                        {CounterfactualProfile::control_column(), {0, 1}, false}};
  cf_vars.insert(cf_vars.end(), vars.begin(), vars.end());
  prof.counterfactual = JointTable(std::move(cf_vars), std::move(cf));
  prof.observational = JointTable(std::move(vars), std::move(obs));
  return prof;
}

}  // namespace pnskit::reference
