#include "pnskit/subgroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pnskit/error.hpp"

namespace pnskit {

double z_for_confidence(double confidence) {
  struct Entry {
    double confidence;
    double z;
  };
  static constexpr Entry kTable[] = {{0.90, 1.645}, {0.95, 1.960}, {0.99, 2.576}};
  for (const auto& e : kTable) {
    if (std::abs(e.confidence - confidence) < 1e-12) return e.z;
  }
  throw Error(Errc::InvalidConfidence, "confidence must be 0.90, 0.95 or 0.99, got " + std::to_string(confidence));
}

std::size_t required_n(double margin, double confidence) {
  if (!(margin > 0.0 && margin < 1.0)) throw Error(Errc::InvalidMargin, "margin must lie in (0,1), got " + std::to_string(margin));
  const double z = z_for_confidence(confidence);
  return static_cast<std::size_t>(std::ceil(z * z * 0.25 / (margin * margin) - 1e-9));
}

double margin_of_error(std::size_t n, double confidence) {
  if (n == 0) return 1.0;
  return z_for_confidence(confidence) * 0.5 / std::sqrt(static_cast<double>(n));
}

void SubgroupSpec::validate(const DiscreteDataset& d) const {
  std::set<std::string> seen;
  for (const auto& c : constraints) {
    if (!seen.insert(c.variable).second) {
      throw Error(Errc::InvalidSubgroup, name + ": variable '" + c.variable + "' is constrained twice");
    }
    if (c.levels.empty()) throw Error(Errc::InvalidSubgroup, name + ": no levels given for '" + c.variable + "'");
    const auto& var = d.variable(d.index_of(c.variable));
    for (int l : c.levels) var.level_index(l);
  }
}

SubgroupSpec parse_subgroup_spec(std::string_view text) {
  SubgroupSpec spec;
  std::string_view body = text;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    spec.name = std::string(text.substr(0, colon));
    body = text.substr(colon + 1);
  } else {
    spec.name = std::string(text);
  }
  std::stringstream ss{std::string(body)};
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(Errc::InvalidSubgroup, "expected VAR=LEVEL[|LEVEL...], got '" + part + "'");
    SubgroupConstraint c{part.substr(0, eq), {}};
    std::stringstream ls(part.substr(eq + 1));
    std::string level;
    while (std::getline(ls, level, '|')) {
      try {
        std::size_t used = 0;
        c.levels.insert(std::stoi(level, &used));
        if (used != level.size()) throw std::invalid_argument(level);
      } catch (const std::exception&) {
        throw Error(Errc::InvalidSubgroup, "level '" + level + "' in '" + part + "' is not an integer");
      }
    }
    for (const auto& prev : spec.constraints) {
      if (prev.variable == c.variable) {
        throw Error(Errc::InvalidSubgroup, spec.name + ": variable '" + c.variable + "' is constrained twice");
      }
    }
    spec.constraints.push_back(std::move(c));
  }
  return spec;
}

DiscreteDataset filter_subgroup(const DiscreteDataset& d, const SubgroupSpec& spec) {
  std::vector<std::pair<std::size_t, const std::set<int>*>> cols;
  for (const auto& c : spec.constraints) cols.emplace_back(d.index_of(c.variable), &c.levels);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < d.n(); ++r) {
    bool match = true;
    for (const auto& [v, levels] : cols) {
      if (!levels->count(d.at(r, v))) {
        match = false;
        break;
      }
    }
    if (match) rows.push_back(r);
  }
  return d.select_rows(rows);
}

SubgroupReport analyze_subgroup(const DiscreteDataset& d, const SubgroupSpec& spec, const Event& x, const Event& y,
                                std::span<const std::string> z, const SubgroupConfig& config) {
  if (x.size() != 1 || y.size() != 1) throw Error(Errc::InvalidConfig, "x and y must each name one variable");
  spec.validate(d);
  SubgroupReport rep;
  rep.spec = spec;
  rep.required = required_n(config.margin, config.confidence);
  const DiscreteDataset sub = filter_subgroup(d, spec);
  rep.rows = sub.n();
  try {
    if (sub.n() == 0) throw Error(Errc::EmptyTable, "no rows match");
    std::vector<std::string> vars(z.begin(), z.end());
    vars.push_back(x.begin()->first);
    vars.push_back(y.begin()->first);
    const JointTable t = tabulate(sub, vars);
    rep.n = t.total();
    rep.do_x = do_adjust(t, x, y, z).value;
    rep.do_x_not = do_adjust(t, complement(t, x), y, z).value;
    rep.interval = backdoor_bounds(t, x, y, z);
  } catch (const Error& e) {
    throw Error(e.code(), "subgroup " + spec.name + ": " + e.detail());
  }
  rep.meets_size = rep.n >= static_cast<double>(rep.required);
  rep.margin = margin_of_error(static_cast<std::size_t>(rep.n), config.confidence);
  return rep;
}

namespace {

void combinations(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

ScanResult scan_subgroups(const DiscreteDataset& d, std::span<const std::string> candidates, const Event& x,
                          const Event& y, std::span<const std::string> z, const ScanOptions& options) {
  for (const auto& c : candidates) {
    if (x.count(c) || y.count(c)) throw Error(Errc::InvalidSubgroup, "'" + c + "' is the treatment or outcome");
    d.index_of(c);
  }
  std::vector<SubgroupSpec> specs;
  for (std::size_t k = 1; k <= std::min(options.depth, candidates.size()); ++k) {
    std::vector<std::vector<std::size_t>> subsets;
    std::vector<std::size_t> cur;
    combinations(candidates.size(), k, 0, cur, subsets);
    for (const auto& subset : subsets) {
      std::vector<const DiscreteVariable*> vars;
      for (std::size_t i : subset) vars.push_back(&d.variable(d.index_of(candidates[i])));
      std::vector<std::size_t> pos(k, 0);
      while (true) {
        SubgroupSpec s;
        for (std::size_t i = 0; i < k; ++i) {
          const int level = vars[i]->levels[pos[i]];
          s.constraints.push_back({vars[i]->name, {level}});
          if (!s.name.empty()) s.name += ',';
          s.name += vars[i]->name + "=" + std::to_string(level);
        }
        specs.push_back(std::move(s));
        std::size_t i = k;
        while (i > 0 && ++pos[i - 1] == vars[i - 1]->cardinality()) pos[--i] = 0;
        if (i == 0) break;
      }
    }
  }

  struct Slot {
    bool ok = false;
    SubgroupReport report;
    std::string reason;
  };
  std::vector<Slot> slots(specs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::size_t rows = filter_subgroup(d, specs[i]).n();
    if (rows < options.min_n || rows == 0) {
      slots[i].reason = std::to_string(rows) + " rows, below the floor of " + std::to_string(options.min_n);
      continue;
    }
    try {
      slots[i].report = analyze_subgroup(d, specs[i], x, y, z, options.config);
      slots[i].ok = true;
    } catch (const Error& e) {
      slots[i].reason = e.what();
    }
  }

  ScanResult res;
  res.candidates = specs.size();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (slots[i].ok) {
      res.reports.push_back(std::move(slots[i].report));
    } else {
      res.skipped.push_back({specs[i].name, slots[i].reason});
    }
  }
  std::sort(res.reports.begin(), res.reports.end(), [](const SubgroupReport& a, const SubgroupReport& b) {
    if (a.interval.lower != b.interval.lower) return a.interval.lower > b.interval.lower;
    return a.spec.name < b.spec.name;
  });
  return res;
}

std::string format_subgroup_table(std::span<const SubgroupReport> reports) {
  std::size_t width = std::string_view("Subpopulation").size();
  for (const auto& r : reports) width = std::max(width, r.spec.name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s | %8s | %-27s | %-27s | %s\n", static_cast<int>(width), "Subpopulation", "n",
                "Bounds of PNS", "P(y|do(x)), P(y|do(x'))", "size");
  out += buf;
  out += std::string(width, '-') + "-+-" + std::string(8, '-') + "-+-" + std::string(27, '-') + "-+-" +
         std::string(27, '-') + "-+-" + std::string(6, '-') + "\n";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-*s | %8.0f | %.10f, %.10f | %.10f, %.10f | %s\n", static_cast<int>(width),
                  r.spec.name.c_str(), r.n, r.interval.lower, r.interval.upper, r.do_x, r.do_x_not,
                  r.meets_size ? "ok" : "small");
    out += buf;
  }
  return out;
}

}  // namespace pnskit
