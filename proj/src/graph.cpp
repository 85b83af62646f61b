#include "pnskit/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "pnskit/error.hpp"

namespace pnskit {

namespace {

std::string describe_cycle(const std::vector<std::string>& names, const std::vector<std::size_t>& cycle) {
  std::string out;
  for (std::size_t i : cycle) {
    out += names[i];
    out += " -> ";
  }
  out += names[cycle.front()];
  return out;
}

// Finds one directed cycle by DFS; returns empty when acyclic.
std::vector<std::size_t> find_cycle(const std::vector<std::vector<std::size_t>>& children) {
  const std::size_t n = children.size();
  std::vector<int> color(n, 0);  // 0 white, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  std::vector<std::size_t> cycle;

  std::function<bool(std::size_t)> visit = [&](std::size_t v) {
    color[v] = 1;
    stack.push_back(v);
    for (std::size_t c : children[v]) {
      if (color[c] == 1) {
        auto it = std::find(stack.begin(), stack.end(), c);
        cycle.assign(it, stack.end());
        return true;
      }
      if (color[c] == 0 && visit(c)) return true;
    }
    stack.pop_back();
    color[v] = 2;
    return false;
  };

  for (std::size_t v = 0; v < n; ++v) {
    if (color[v] == 0 && visit(v)) return cycle;
  }
  return {};
}

}  // namespace

CausalGraph CausalGraph::build(std::vector<std::string> nodes, std::vector<NamedEdge> edges) {
  CausalGraph g;
  g.names_ = std::move(nodes);
  for (std::size_t i = 0; i < g.names_.size(); ++i) {
    if (g.names_[i].empty()) throw Error(Errc::UnknownNode, "empty node name");
    if (!g.index_.emplace(g.names_[i], i).second) {
      throw Error(Errc::DuplicateNode, "node '" + g.names_[i] + "' listed twice");
    }
  }
  const std::size_t n = g.names_.size();
  g.parents_.assign(n, {});
  g.children_.assign(n, {});

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [from, to] : edges) {
    auto fi = g.index_.find(from);
    if (fi == g.index_.end()) throw Error(Errc::UnknownNode, "edge endpoint '" + from + "' is not a node");
    auto ti = g.index_.find(to);
    if (ti == g.index_.end()) throw Error(Errc::UnknownNode, "edge endpoint '" + to + "' is not a node");
    if (fi->second == ti->second) throw Error(Errc::CycleDetected, "self-loop " + from + " -> " + to);
    if (!seen.emplace(fi->second, ti->second).second) {
      throw Error(Errc::DuplicateEdge, from + " -> " + to);
    }
    g.children_[fi->second].push_back(ti->second);
    g.parents_[ti->second].push_back(fi->second);
  }
  g.edges_ = std::move(edges);

  if (auto cycle = find_cycle(g.children_); !cycle.empty()) {
    throw Error(Errc::CycleDetected, describe_cycle(g.names_, cycle));
  }

  // Kahn's algorithm, always taking the lowest-index ready node.
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = g.parents_[v].size();
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.insert(v);
  }
  while (!ready.empty()) {
    std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    g.topo_.push_back(v);
    for (std::size_t c : g.children_[v]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  return g;
}

bool CausalGraph::contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

std::size_t CausalGraph::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error(Errc::UnknownNode, "'" + std::string(name) + "' is not in the graph");
  return it->second;
}

bool CausalGraph::has_edge(std::size_t from, std::size_t to) const {
  const auto& c = children_[from];
  return std::find(c.begin(), c.end(), to) != c.end();
}

namespace {

template <typename Next>
NodeSet closure(const CausalGraph& g, std::size_t start, Next next) {
  std::vector<bool> seen(g.size(), false);
  std::deque<std::size_t> queue{start};
  NodeSet out;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : next(v)) {
      if (!seen[w]) {
        seen[w] = true;
        if (w != start) out.insert(g.name(w));
        queue.push_back(w);
      }
    }
  }
  return out;
}

}  // namespace

NodeSet CausalGraph::ancestors(std::string_view v) const {
  return closure(*this, index(v), [this](std::size_t i) -> const std::vector<std::size_t>& { return parents_[i]; });
}

NodeSet CausalGraph::descendants(std::string_view v) const {
  return closure(*this, index(v), [this](std::size_t i) -> const std::vector<std::size_t>& { return children_[i]; });
}

CausalGraph CausalGraph::without_outgoing(std::string_view v) const {
  const std::string name(v);
  index(name);
  std::vector<NamedEdge> kept;
  for (const auto& e : edges_) {
    if (e.first != name) kept.push_back(e);
  }
  return build(names_, std::move(kept));
}

namespace {

std::vector<std::size_t> resolve(const CausalGraph& g, const NodeSet& s) {
  std::vector<std::size_t> out;
  out.reserve(s.size());
  for (const auto& name : s) out.push_back(g.index(name));
  return out;
}

void require_disjoint(const NodeSet& a, const NodeSet& b, const char* what) {
  for (const auto& x : a) {
    if (b.count(x)) throw Error(Errc::OverlappingSets, std::string(what) + " share '" + x + "'");
  }
}

}  // namespace

bool d_separated(const CausalGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& z) {
  const auto src = resolve(g, a);
  const auto dst = resolve(g, b);
  const auto cond = resolve(g, z);
  require_disjoint(a, b, "A and B");
  require_disjoint(a, z, "A and Z");
  require_disjoint(b, z, "B and Z");

  const std::size_t n = g.size();
  std::vector<bool> in_z(n, false);
  for (std::size_t v : cond) in_z[v] = true;

  // Z together with all of its ancestors: a collider is open iff it lies here.
  std::vector<bool> anc_z(n, false);
  {
    std::deque<std::size_t> queue(cond.begin(), cond.end());
    for (std::size_t v : cond) anc_z[v] = true;
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t p : g.parents(v)) {
        if (!anc_z[p]) {
          anc_z[p] = true;
          queue.push_back(p);
        }
      }
    }
  }

  // State: (node, arrived-from-child). "up" means the trail enters v from one
  // of its children, "down" means it enters from a parent.
  std::vector<bool> visited_up(n, false), visited_down(n, false);
  std::vector<bool> reachable(n, false);
  std::deque<std::pair<std::size_t, bool>> queue;
  for (std::size_t s : src) queue.emplace_back(s, true);

  while (!queue.empty()) {
    auto [v, up] = queue.front();
    queue.pop_front();
    if (up ? visited_up[v] : visited_down[v]) continue;
    (up ? visited_up : visited_down)[v] = true;
    if (!in_z[v]) reachable[v] = true;

    if (up) {
      if (!in_z[v]) {
        for (std::size_t p : g.parents(v)) queue.emplace_back(p, true);
        for (std::size_t c : g.children(v)) queue.emplace_back(c, false);
      }
    } else {
      if (!in_z[v]) {
        for (std::size_t c : g.children(v)) queue.emplace_back(c, false);
      }
      if (anc_z[v]) {
        for (std::size_t p : g.parents(v)) queue.emplace_back(p, true);
      }
    }
  }

  for (std::size_t t : dst) {
    if (reachable[t]) return false;
  }
  return true;
}

bool satisfies_backdoor(const CausalGraph& g, std::string_view x, std::string_view y, const NodeSet& z) {
  g.index(x);
  g.index(y);
  for (const auto& v : z) g.index(v);
  if (x == y) throw Error(Errc::OverlappingSets, "treatment and outcome are both '" + std::string(x) + "'");
  if (z.count(std::string(x)) || z.count(std::string(y))) {
    throw Error(Errc::OverlappingSets, "adjustment set contains the treatment or outcome");
  }

  const NodeSet desc = g.descendants(x);
  for (const auto& v : z) {
    if (desc.count(v)) return false;
  }
  // Paths with an arrow into x are exactly the x–y paths that survive once
  // the edges leaving x are removed.
  const CausalGraph cut = g.without_outgoing(x);
  return d_separated(cut, NodeSet{std::string(x)}, NodeSet{std::string(y)}, z);
}

std::vector<NodeSet> find_backdoor_sets(const CausalGraph& g, std::string_view x, std::string_view y,
                                        std::size_t max_size) {
  g.index(x);
  g.index(y);
  if (x == y) throw Error(Errc::OverlappingSets, "treatment and outcome are both '" + std::string(x) + "'");

  const NodeSet desc = g.descendants(x);
  std::vector<std::string> candidates;
  for (const auto& name : g.nodes()) {
    if (name != x && name != y && !desc.count(name)) candidates.push_back(name);
  }
  std::sort(candidates.begin(), candidates.end());

  const CausalGraph cut = g.without_outgoing(x);
  const NodeSet xs{std::string(x)}, ys{std::string(y)};
  std::vector<NodeSet> found;
  const std::size_t limit = std::min(max_size, candidates.size());

  for (std::size_t k = 0; k <= limit; ++k) {
    // Lexicographic k-combinations of the sorted candidate list.
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      NodeSet s;
      for (std::size_t i : pick) s.insert(candidates[i]);
      const bool has_found_subset = std::any_of(found.begin(), found.end(), [&](const NodeSet& f) {
        return std::includes(s.begin(), s.end(), f.begin(), f.end());
      });
      if (!has_found_subset && d_separated(cut, xs, ys, s)) found.push_back(std::move(s));

      std::size_t i = k;
      while (i > 0 && pick[i - 1] == candidates.size() - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return found;
}

std::string format_node_set(const NodeSet& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& v : s) {
    if (!first) out += ", ";
    out += v;
    first = false;
  }
  return out + "}";
}

}  // namespace pnskit
