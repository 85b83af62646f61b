#include "pnskit/discovery.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <optional>

#include "pnskit/error.hpp"

namespace pnskit {

namespace {

struct Cells {
  std::vector<double> n;  // ka * kb, b fastest
  double total = 0.0;
};

// Adds the stratum's G² and dof to the running totals.
void add_stratum(const Cells& c, std::size_t ka, std::size_t kb, double& g2, double& dof) {
  std::vector<double> ra(ka, 0.0), cb(kb, 0.0);
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      ra[i] += c.n[i * kb + j];
      cb[j] += c.n[i * kb + j];
    }
  }
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      const double o = c.n[i * kb + j];
      if (o > 0.0) g2 += 2.0 * o * std::log(o * c.total / (ra[i] * cb[j]));
    }
  }
  const auto nz = [](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; }));
  };
  dof += std::max(0.0, nz(ra) - 1.0) * std::max(0.0, nz(cb) - 1.0);
}

double min_expected(const Cells& c, std::size_t ka, std::size_t kb) {
  std::vector<double> ra(ka, 0.0), cb(kb, 0.0);
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      ra[i] += c.n[i * kb + j];
      cb[j] += c.n[i * kb + j];
    }
  }
  double lo = INFINITY;
  for (double r : ra) {
    for (double s : cb) {
      if (r > 0.0 && s > 0.0) lo = std::min(lo, r * s / c.total);
    }
  }
  return lo;
}

}  // namespace

CiTestResult ci_test(const JointTable& t, std::string_view a, std::string_view b, std::span<const std::string> cond,
                     double alpha) {
  if (a == b) throw Error(Errc::OverlappingSets, "cannot test '" + std::string(a) + "' against itself");
  for (const auto& c : cond) {
    if (c == a || c == b) throw Error(Errc::OverlappingSets, "conditioning set contains '" + c + "'");
  }
  std::vector<std::string> names(cond.begin(), cond.end());
  names.emplace_back(a);
  names.emplace_back(b);
  const JointTable m = t.marginal(names);
  const std::size_t ka = m.variables()[names.size() - 2].cardinality();
  const std::size_t kb = m.variables()[names.size() - 1].cardinality();
  const std::size_t block = ka * kb;
  const auto w = m.weights();

  {
    std::vector<double> ma(ka, 0.0), mb(kb, 0.0);
    for (std::size_t cell = 0; cell < w.size(); ++cell) {
      ma[(cell / kb) % ka] += w[cell];
      mb[cell % kb] += w[cell];
    }
    auto positive = [](const std::vector<double>& v) { return std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; }); };
    if (positive(ma) < 2) throw Error(Errc::DegenerateTable, "'" + std::string(a) + "' is constant");
    if (positive(mb) < 2) throw Error(Errc::DegenerateTable, "'" + std::string(b) + "' is constant");
  }

  CiTestResult r;
  Cells pooled{std::vector<double>(block, 0.0), 0.0};
  double g2 = 0.0, dof = 0.0;
  for (std::size_t s = 0; s * block < w.size(); ++s) {
    Cells c{std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(s * block),
                                w.begin() + static_cast<std::ptrdiff_t>((s + 1) * block)),
            0.0};
    for (double v : c.n) c.total += v;
    if (c.total == 0.0) continue;
    ++r.strata;
    if (min_expected(c, ka, kb) < kMinExpectedCount) {
      ++r.pooled_strata;
      for (std::size_t i = 0; i < block; ++i) pooled.n[i] += c.n[i];
      pooled.total += c.total;
      continue;
    }
    add_stratum(c, ka, kb, g2, dof);
  }
  if (pooled.total > 0.0) add_stratum(pooled, ka, kb, g2, dof);

  r.statistic = std::max(0.0, g2);
  r.dof = dof;
  r.p_value = dof > 0.0 ? boost::math::gamma_q(dof / 2.0, r.statistic / 2.0) : 1.0;
  r.independent = r.p_value > alpha;
  return r;
}

NamedEdge unordered_key(std::string_view a, std::string_view b) {
  return a < b ? NamedEdge{std::string(a), std::string(b)} : NamedEdge{std::string(b), std::string(a)};
}

bool Skeleton::adjacent(std::string_view a, std::string_view b) const {
  return std::any_of(edges.begin(), edges.end(), [&](const NamedEdge& e) {
    return (e.first == a && e.second == b) || (e.first == b && e.second == a);
  });
}

const NodeSet* Skeleton::sepset(std::string_view a, std::string_view b) const {
  auto it = sepsets.find(unordered_key(a, b));
  return it == sepsets.end() ? nullptr : &it->second;
}

namespace {

// Calls f on each k-subset of `pool` (ascending positions) until f returns true.
template <typename F>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t k, F&& f) {
  if (k > pool.size()) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<std::size_t> subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    if (f(subset)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Skeleton learn_skeleton(const JointTable& t, double alpha, std::size_t max_cond) {
  const std::size_t p = t.variables().size();
  Skeleton s;
  s.alpha = alpha;
  for (const auto& v : t.variables()) s.nodes.push_back(v.name);
  std::vector<std::vector<char>> adj(p, std::vector<char>(p, 1));
  for (std::size_t i = 0; i < p; ++i) adj[i][i] = 0;

  struct Outcome {
    bool removed = false;
    NodeSet sepset;
    std::size_t tests = 0;
  };

  for (std::size_t level = 0; level <= max_cond; ++level) {
    std::vector<std::pair<std::size_t, std::size_t>> work;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        if (adj[i][j]) work.emplace_back(i, j);
      }
    }
    auto neighbours = [&](std::size_t v, std::size_t other) {
      std::vector<std::size_t> out;
      for (std::size_t k = 0; k < p; ++k) {
        if (adj[v][k] && k != other) out.push_back(k);
      }
      return out;
    };
    bool any_testable = false;
    for (const auto& [i, j] : work) {
      if (neighbours(i, j).size() >= level || neighbours(j, i).size() >= level) any_testable = true;
    }
    if (!any_testable) break;

    std::vector<Outcome> outcomes(work.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t w = 0; w < work.size(); ++w) {
      const auto [i, j] = work[w];
      Outcome& out = outcomes[w];
      auto try_pool = [&](const std::vector<std::size_t>& pool) {
        return for_each_subset(pool, level, [&](const std::vector<std::size_t>& subset) {
          std::vector<std::string> cond;
          for (std::size_t k : subset) cond.push_back(s.nodes[k]);
          ++out.tests;
          bool indep;
          try {
            indep = ci_test(t, s.nodes[i], s.nodes[j], cond, alpha).independent;
          } catch (const Error& e) {
            if (e.code() != Errc::DegenerateTable) throw;
            indep = true;
          }
          if (indep) {
            out.removed = true;
            out.sepset = NodeSet(cond.begin(), cond.end());
          }
          return indep;
        });
      };
      if (!try_pool(neighbours(i, j))) try_pool(neighbours(j, i));
    }
    for (std::size_t w = 0; w < work.size(); ++w) {
      s.tests += outcomes[w].tests;
      if (!outcomes[w].removed) continue;
      const auto [i, j] = work[w];
      adj[i][j] = adj[j][i] = 0;
      s.sepsets[unordered_key(s.nodes[i], s.nodes[j])] = outcomes[w].sepset;
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      if (adj[i][j]) s.edges.emplace_back(s.nodes[i], s.nodes[j]);
    }
  }
  return s;
}

bool CpdagResult::adjacent(std::string_view a, std::string_view b) const {
  return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b);
}

bool CpdagResult::has_directed(std::string_view from, std::string_view to) const {
  return directed.count(NamedEdge{std::string(from), std::string(to)}) > 0;
}

bool CpdagResult::has_undirected(std::string_view a, std::string_view b) const {
  return undirected.count(unordered_key(a, b)) > 0;
}

bool CpdagResult::same_class(const CpdagResult& other) const {
  return NodeSet(nodes.begin(), nodes.end()) == NodeSet(other.nodes.begin(), other.nodes.end()) &&
         directed == other.directed && undirected == other.undirected;
}

GraphFile CpdagResult::to_graph_file() const {
  GraphFile f;
  f.nodes = nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (has_directed(nodes[i], nodes[j])) f.directed.emplace_back(nodes[i], nodes[j]);
      if (i < j && has_undirected(nodes[i], nodes[j])) f.undirected.emplace_back(nodes[i], nodes[j]);
    }
  }
  return f;
}

CpdagResult orient_v_structures(const Skeleton& s) {
  CpdagResult out;
  out.nodes = s.nodes;
  out.sepsets = s.sepsets;
  out.alpha = s.alpha;
  const std::size_t p = s.nodes.size();
  std::vector<std::vector<char>> adj(p, std::vector<char>(p, 0));
  for (const auto& [a, b] : s.edges) {
    const auto ia = static_cast<std::size_t>(std::find(s.nodes.begin(), s.nodes.end(), a) - s.nodes.begin());
    const auto ib = static_cast<std::size_t>(std::find(s.nodes.begin(), s.nodes.end(), b) - s.nodes.begin());
    adj[ia][ib] = adj[ib][ia] = 1;
  }

  std::set<NamedEdge> proposed;
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      if (adj[a][b]) continue;
      const NodeSet* sep = s.sepset(s.nodes[a], s.nodes[b]);
      for (std::size_t c = 0; c < p; ++c) {
        if (!adj[a][c] || !adj[b][c]) continue;
        if (sep && sep->count(s.nodes[c])) continue;
        proposed.emplace(s.nodes[a], s.nodes[c]);
        proposed.emplace(s.nodes[b], s.nodes[c]);
      }
    }
  }
  for (const auto& [a, b] : s.edges) {
    const bool ab = proposed.count({a, b}) > 0;
    const bool ba = proposed.count({b, a}) > 0;
    if (ab && ba) {
      out.conflicts.push_back(a + " -- " + b);
      out.undirected.insert(unordered_key(a, b));
    } else if (ab) {
      out.directed.emplace(a, b);
    } else if (ba) {
      out.directed.emplace(b, a);
    } else {
      out.undirected.insert(unordered_key(a, b));
    }
  }
  return out;
}

CpdagResult complete_orientation(CpdagResult g) {
  const std::size_t p = g.nodes.size();
  std::vector<std::vector<char>> dir(p, std::vector<char>(p, 0)), und(p, std::vector<char>(p, 0));
  auto idx = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(g.nodes.begin(), g.nodes.end(), n) - g.nodes.begin());
  };
  for (const auto& [a, b] : g.directed) dir[idx(a)][idx(b)] = 1;
  for (const auto& [a, b] : g.undirected) und[idx(a)][idx(b)] = und[idx(b)][idx(a)] = 1;
  auto adjacent = [&](std::size_t a, std::size_t b) { return dir[a][b] || dir[b][a] || und[a][b]; };

  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<char> seen(p, 0);
    std::vector<std::size_t> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (v == to) return true;
      for (std::size_t w = 0; w < p; ++w) {
        if (dir[v][w] && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return false;
  };

  auto rule_applies = [&](std::size_t u, std::size_t v) {
    for (std::size_t a = 0; a < p; ++a) {
      // R1: a -> u -- v, a and v nonadjacent.
      if (dir[a][u] && a != v && !adjacent(a, v)) return true;
      // R2: u -> a -> v.
      if (dir[u][a] && dir[a][v]) return true;
    }
    // R3: u -- c1 -> v, u -- c2 -> v, c1 and c2 nonadjacent.
    for (std::size_t c1 = 0; c1 < p; ++c1) {
      if (!und[u][c1] || !dir[c1][v]) continue;
      for (std::size_t c2 = c1 + 1; c2 < p; ++c2) {
        if (und[u][c2] && dir[c2][v] && !adjacent(c1, c2)) return true;
      }
    }
    // R4: u -- k -> l -> v, k and v nonadjacent, u adjacent to l.
    for (std::size_t k = 0; k < p; ++k) {
      if (!und[u][k] || k == v || adjacent(k, v)) continue;
      for (std::size_t l = 0; l < p; ++l) {
        if (dir[k][l] && dir[l][v] && adjacent(u, l)) return true;
      }
    }
    return false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a + 1; b < p; ++b) {
        if (!und[a][b]) continue;
        for (const auto& [u, v] : {std::pair{a, b}, std::pair{b, a}}) {
          if (!rule_applies(u, v) || reaches(v, u)) continue;
          und[u][v] = und[v][u] = 0;
          dir[u][v] = 1;
          changed = true;
          break;
        }
      }
    }
  }

  g.directed.clear();
  g.undirected.clear();
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      if (dir[a][b]) g.directed.emplace(g.nodes[a], g.nodes[b]);
      if (a < b && und[a][b]) g.undirected.insert(unordered_key(g.nodes[a], g.nodes[b]));
    }
  }
  return g;
}

CpdagResult discover(const JointTable& t, double alpha, std::size_t max_cond) {
  return complete_orientation(orient_v_structures(learn_skeleton(t, alpha, max_cond)));
}

CpdagResult cpdag_of(const CausalGraph& g) {
  CpdagResult out;
  out.nodes = g.nodes();
  const std::size_t p = g.size();
  for (std::size_t c = 0; c < p; ++c) {
    const auto& pa = g.parents(c);
    for (std::size_t i = 0; i < pa.size(); ++i) {
      for (std::size_t j = i + 1; j < pa.size(); ++j) {
        if (g.adjacent(pa[i], pa[j])) continue;
        out.directed.emplace(g.name(pa[i]), g.name(c));
        out.directed.emplace(g.name(pa[j]), g.name(c));
      }
    }
  }
  for (const auto& [a, b] : g.edges()) {
    if (!out.directed.count({a, b})) out.undirected.insert(unordered_key(a, b));
  }
  return complete_orientation(std::move(out));
}

}  // namespace pnskit
