#include "pnskit/estimate.hpp"

#include <algorithm>
#include <omp.h>
#include <set>

#include "pnskit/error.hpp"
#include "pnskit/numeric.hpp"

namespace pnskit {

Event parse_event(std::string_view text) {
  Event e;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(pos, comma - pos);
    pos = comma + 1;
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == part.size()) {
      throw Error(Errc::InvalidConfig, "expected NAME=LEVEL, got '" + std::string(part) + "'");
    }
    const std::string name(part.substr(0, eq));
    int level = 0;
    try {
      std::size_t used = 0;
      level = std::stoi(std::string(part.substr(eq + 1)), &used);
      if (used != part.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, "level in '" + std::string(part) + "' is not an integer");
    }
    if (!e.emplace(name, level).second) throw Error(Errc::InvalidConfig, "variable '" + name + "' assigned twice");
  }
  if (e.empty()) throw Error(Errc::InvalidConfig, "empty event '" + std::string(text) + "'");
  return e;
}

std::string format_event(const Event& e) {
  std::string out;
  for (const auto& [k, v] : e) {
    if (!out.empty()) out += ',';
    out += k + "=" + std::to_string(v);
  }
  return out;
}

JointTable::JointTable(std::vector<DiscreteVariable> variables, std::vector<double> weights, std::size_t excluded_rows)
    : vars_(std::move(variables)), weights_(std::move(weights)), excluded_(excluded_rows) {
  std::size_t cells = 1;
  strides_.assign(vars_.size(), 1);
  for (std::size_t i = vars_.size(); i-- > 0;) {
    strides_[i] = cells;
    if (vars_[i].cardinality() == 0) throw Error(Errc::EmptyTable, "variable '" + vars_[i].name + "' has no levels");
    if (cells > kMaxCells / vars_[i].cardinality()) {
      throw Error(Errc::TableTooLarge, "joint table would exceed " + std::to_string(kMaxCells) + " cells");
    }
    cells *= vars_[i].cardinality();
  }
  if (weights_.size() != cells) throw Error(Errc::InvalidConfig, "weight vector does not match the table shape");
  CompensatedSum s;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw Error(Errc::InvalidConfig, "negative or NaN cell weight");
    s.add(w);
  }
  total_ = s.value();
  if (!(total_ > 0.0)) throw Error(Errc::EmptyTable, "table has no observations");
}

std::size_t JointTable::var_index(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].name == name) return i;
  }
  throw Error(Errc::UnknownVariable, "'" + std::string(name) + "' is not in the table");
}

bool JointTable::has_variable(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(), [&](const auto& v) { return v.name == name; });
}

double JointTable::count(const Event& e) const {
  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const auto& [name, level] : e) {
    const std::size_t v = var_index(name);
    fixed.emplace_back(v, vars_[v].level_index(level));
  }
  CompensatedSum s;
  for (std::size_t cell = 0; cell < weights_.size(); ++cell) {
    if (weights_[cell] == 0.0) continue;
    bool match = true;
    for (const auto& [v, li] : fixed) {
      if (level_at(cell, v) != li) {
        match = false;
        break;
      }
    }
    if (match) s.add(weights_[cell]);
  }
  return s.value();
}

JointTable JointTable::marginal(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  std::vector<DiscreteVariable> vars;
  for (const auto& n : names) {
    idx.push_back(var_index(n));
    vars.push_back(vars_[idx.back()]);
  }
  std::vector<std::size_t> strides(idx.size(), 1);
  std::size_t cells = 1;
  for (std::size_t i = idx.size(); i-- > 0;) {
    strides[i] = cells;
    cells *= vars[i].cardinality();
  }
  // Accumulate in cell order so the result does not depend on scheduling.
  std::vector<CompensatedSum> acc(cells);
  for (std::size_t cell = 0; cell < weights_.size(); ++cell) {
    if (weights_[cell] == 0.0) continue;
    std::size_t target = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) target += level_at(cell, idx[i]) * strides[i];
    acc[target].add(weights_[cell]);
  }
  std::vector<double> w(cells);
  for (std::size_t i = 0; i < cells; ++i) w[i] = acc[i].value();
  return JointTable(std::move(vars), std::move(w), excluded_);
}

std::vector<Event> JointTable::assignments(std::span<const std::string> names) const {
  std::vector<const DiscreteVariable*> vars;
  for (const auto& n : names) vars.push_back(&vars_[var_index(n)]);
  std::vector<Event> out;
  std::vector<std::size_t> digit(vars.size(), 0);
  while (true) {
    Event e;
    for (std::size_t i = 0; i < vars.size(); ++i) e[vars[i]->name] = vars[i]->levels[digit[i]];
    out.push_back(std::move(e));
    std::size_t i = vars.size();
    while (i > 0) {
      --i;
      if (++digit[i] < vars[i]->cardinality()) break;
      digit[i] = 0;
      if (i == 0) return out;
    }
    if (vars.empty()) return out;
  }
}

JointTable tabulate(const DiscreteDataset& d, std::span<const std::string> vars) {
  std::vector<std::size_t> idx;
  std::vector<DiscreteVariable> table_vars;
  std::set<std::string> seen;
  for (const auto& v : vars) {
    if (!seen.insert(v).second) throw Error(Errc::InvalidConfig, "variable '" + v + "' tabulated twice");
    idx.push_back(d.index_of(v));
    table_vars.push_back(d.variable(idx.back()));
    table_vars.back().allows_missing = false;
  }
  std::vector<std::size_t> strides(idx.size(), 1);
  std::size_t cells = 1;
  for (std::size_t i = idx.size(); i-- > 0;) {
    strides[i] = cells;
    if (table_vars[i].cardinality() == 0 || cells > JointTable::kMaxCells / table_vars[i].cardinality()) {
      throw Error(Errc::TableTooLarge, "too many cells to tabulate");
    }
    cells *= table_vars[i].cardinality();
  }

  const std::size_t n = d.n();
  std::vector<std::span<const int>> cols;
  for (std::size_t v : idx) cols.push_back(d.column(v));

  // Per-thread histograms of integer counts; merging integer-valued doubles
  // is exact, so the result does not depend on the thread count.
  std::vector<double> counts(cells, 0.0);
  std::size_t excluded = 0;
#pragma omp parallel
  {
    std::vector<double> local(cells, 0.0);
    std::size_t local_excluded = 0;
#pragma omp for schedule(static)
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t cell = 0;
      bool missing = false;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const int level = cols[i][r];
        if (level == kMissingLevel) {
          missing = true;
          break;
        }
        const auto& lv = table_vars[i].levels;
        cell += static_cast<std::size_t>(std::lower_bound(lv.begin(), lv.end(), level) - lv.begin()) * strides[i];
      }
      if (missing) {
        ++local_excluded;
      } else {
        local[cell] += 1.0;
      }
    }
#pragma omp critical
    {
      for (std::size_t c = 0; c < cells; ++c) counts[c] += local[c];
      excluded += local_excluded;
    }
  }
  if (excluded == n) throw Error(Errc::EmptyTable, "no complete rows to tabulate");
  return JointTable(std::move(table_vars), std::move(counts), excluded);
}

namespace {

std::vector<std::string> event_vars(const Event& e) {
  std::vector<std::string> out;
  for (const auto& [k, v] : e) out.push_back(k);
  return out;
}

}  // namespace

ProbEstimate prob(const JointTable& t, const Event& event, const Event& given, double alpha) {
  Event joint = given;
  for (const auto& [k, v] : event) {
    if (given.count(k)) throw Error(Errc::OverlappingSets, "'" + k + "' appears in both the event and the condition");
    joint[k] = v;
  }
  ProbEstimate out;
  out.support = given.empty() ? t.total() : t.count(given);
  if (!(out.support > 0.0)) {
    throw Error(Errc::EmptyCondition, "no observations with " + (given.empty() ? std::string("{}") : format_event(given)));
  }
  out.count = t.count(joint);
  if (alpha > 0.0) {
    double cells = 1.0;
    for (const auto& [k, v] : event) cells *= static_cast<double>(t.variable(k).cardinality());
    out.value = (out.count + alpha) / (out.support + alpha * cells);
  } else {
    out.value = out.count / out.support;
  }
  return out;
}

AdjustResult do_adjust(const JointTable& t, const Event& x, const Event& y, std::span<const std::string> z,
                       double alpha) {
  std::vector<std::string> names(z.begin(), z.end());
  for (const auto& v : names) {
    if (x.count(v) || y.count(v)) throw Error(Errc::OverlappingSets, "'" + v + "' is both adjusted for and in x/y");
  }
  for (const auto& v : event_vars(x)) {
    if (y.count(v)) throw Error(Errc::OverlappingSets, "'" + v + "' is in both x and y");
    names.push_back(v);
  }
  for (const auto& v : event_vars(y)) names.push_back(v);
  const JointTable m = t.marginal(names);

  AdjustResult out;
  CompensatedSum sum;
  for (const Event& zs : m.assignments(z)) {
    const double nz = zs.empty() ? m.total() : m.count(zs);
    if (nz == 0.0) continue;
    Event xz = zs;
    xz.insert(x.begin(), x.end());
    const double nxz = m.count(xz);
    if (nxz == 0.0) {
      throw Error(Errc::PositivityViolation,
                  "stratum " + (zs.empty() ? std::string("{}") : format_event(zs)) + " has no rows with " + format_event(x));
    }
    AdjustStratum s;
    s.z = zs;
    s.weight = nz / m.total();
    s.support = nxz;
    s.p_outcome = prob(m, y, xz, alpha).value;
    sum.add(s.p_outcome * s.weight);
    out.strata.push_back(std::move(s));
  }
  out.value = sum.value();
  return out;
}

Event complement(const JointTable& t, const Event& e) {
  if (e.size() != 1) throw Error(Errc::InvalidConfig, "expected a single-variable event, got '" + format_event(e) + "'");
  const auto& [name, level] = *e.begin();
  const auto& var = t.variable(name);
  if (var.cardinality() != 2) {
    throw Error(Errc::NonBinaryVariable, "'" + name + "' has " + std::to_string(var.cardinality()) + " levels");
  }
  var.level_index(level);
  return Event{{name, var.levels[0] == level ? var.levels[1] : var.levels[0]}};
}

std::vector<BinaryStratum> binary_strata(const JointTable& t, const Event& x, const Event& y,
                                         std::span<const std::string> z) {
  const Event xp = complement(t, x);
  const Event yp = complement(t, y);
  std::vector<std::string> names(z.begin(), z.end());
  names.push_back(x.begin()->first);
  names.push_back(y.begin()->first);
  for (const auto& v : z) {
    if (v == names[names.size() - 2] || v == names.back()) {
      throw Error(Errc::OverlappingSets, "'" + v + "' is both adjusted for and in x/y");
    }
  }
  const JointTable m = t.marginal(names);

  std::vector<BinaryStratum> out;
  for (const Event& zs : m.assignments(z)) {
    auto cell = [&](const Event& a, const Event& b) {
      Event e = zs;
      e.insert(a.begin(), a.end());
      e.insert(b.begin(), b.end());
      return m.count(e);
    };
    BinaryStratum s;
    s.z = zs;
    s.xy = cell(x, y);
    s.xy_not = cell(x, yp);
    s.x_not_y = cell(xp, y);
    s.x_not_y_not = cell(xp, yp);
    s.n = s.xy + s.xy_not + s.x_not_y + s.x_not_y_not;
    if (s.n > 0.0) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pnskit
