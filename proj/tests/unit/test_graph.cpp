#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "pnskit/error.hpp"
#include "pnskit/graph.hpp"
#include "pnskit/graph_io.hpp"
#include "pnskit/reference.hpp"

using namespace pnskit;

namespace {

CausalGraph confounded() { return CausalGraph::build({"X", "Y", "Z"}, {{"Z", "X"}, {"Z", "Y"}, {"X", "Y"}}); }
CausalGraph unconfounded() { return CausalGraph::build({"X", "Y", "Z"}, {{"Z", "Y"}, {"X", "Y"}}); }
CausalGraph diet_soda() {
  return CausalGraph::build({"DietCoke", "Fatness", "Diabetes"},
                            {{"Diabetes", "DietCoke"}, {"Diabetes", "Fatness"}, {"DietCoke", "Fatness"}});
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IoError;
}

std::vector<NodeSet> all_subsets(const std::vector<std::string>& items) {
  std::vector<NodeSet> out;
  for (std::size_t m = 0; m < (std::size_t{1} << items.size()); ++m) {
    NodeSet s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (m & (std::size_t{1} << i)) s.insert(items[i]);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("build validates structure") {
  const auto g = confounded();
  CHECK(g.size() == 3);
  CHECK(g.edges().size() == 3);
  CHECK(CausalGraph::build({"A"}, {}).size() == 1);
  CHECK(code_of([] { CausalGraph::build({"A", "B"}, {{"A", "B"}, {"B", "A"}}); }) == Errc::CycleDetected);
  CHECK(code_of([] { CausalGraph::build({"A"}, {{"A", "A"}}); }) == Errc::CycleDetected);
  CHECK(code_of([] { CausalGraph::build({"A"}, {{"A", "B"}}); }) == Errc::UnknownNode);
  CHECK(code_of([] { CausalGraph::build({"A", "B"}, {{"A", "B"}, {"A", "B"}}); }) == Errc::DuplicateEdge);
  CHECK(code_of([] { CausalGraph::build({"A", "A"}, {}); }) == Errc::DuplicateNode);
}

TEST_CASE("cycle error names the cycle") {
  try {
    CausalGraph::build({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"C", "A"}});
    FAIL("accepted a cycle");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("A") != std::string::npos);
    CHECK(msg.find("B") != std::string::npos);
    CHECK(msg.find("C") != std::string::npos);
  }
}

TEST_CASE("names are case-sensitive") {
  const auto g = CausalGraph::build({"a", "A"}, {{"a", "A"}});
  CHECK(g.contains("a"));
  CHECK(g.contains("A"));
  CHECK_FALSE(g.contains("b"));
}

TEST_CASE("ancestors and descendants") {
  const auto chain = CausalGraph::build({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
  CHECK(chain.descendants("A") == NodeSet{"B", "C"});
  CHECK(chain.ancestors("C") == NodeSet{"A", "B"});
  CHECK(diet_soda().descendants("Diabetes") == NodeSet{"DietCoke", "Fatness"});
  CHECK(CausalGraph::build({"A", "B"}, {}).descendants("A").empty());
  CHECK(code_of([&] { chain.descendants("Q"); }) == Errc::UnknownNode);
}

TEST_CASE("topological order respects edges") {
  const auto g = CausalGraph::build({"C", "B", "A"}, {{"A", "B"}, {"B", "C"}});
  const auto& topo = g.topological_order();
  std::vector<std::size_t> pos(g.size());
  for (std::size_t i = 0; i < topo.size(); ++i) pos[topo[i]] = i;
  for (const auto& [a, b] : g.edges()) CHECK(pos[g.index(a)] < pos[g.index(b)]);
}

TEST_CASE("d-separation textbook cases") {
  const auto chain = CausalGraph::build({"X", "M", "Y"}, {{"X", "M"}, {"M", "Y"}});
  CHECK(d_separated(chain, {"X"}, {"Y"}, {"M"}));
  CHECK_FALSE(d_separated(chain, {"X"}, {"Y"}, {}));

  const auto collider = CausalGraph::build({"X", "C", "Y", "D"}, {{"X", "C"}, {"Y", "C"}, {"C", "D"}});
  CHECK(d_separated(collider, {"X"}, {"Y"}, {}));
  CHECK_FALSE(d_separated(collider, {"X"}, {"Y"}, {"C"}));
  CHECK_FALSE(d_separated(collider, {"X"}, {"Y"}, {"D"}));

  CHECK_FALSE(d_separated(confounded(), {"X"}, {"Y"}, {"Z"}));
  CHECK(code_of([&] { d_separated(chain, {"X"}, {"X"}, {}); }) == Errc::OverlappingSets);
  CHECK(code_of([&] { d_separated(chain, {"X"}, {"Y"}, {"Q"}); }) == Errc::UnknownNode);
}

TEST_CASE("d-separation agrees with path enumeration on random DAGs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + trial % 5;
    const auto g = fixtures::random_dag(n, 0.4, rng);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        std::vector<std::string> rest;
        for (std::size_t k = 0; k < n; ++k) {
          if (k != a && k != b) rest.push_back(g.name(k));
        }
        for (const auto& z : all_subsets(rest)) {
          const NodeSet A{g.name(a)}, B{g.name(b)};
          const bool fast = d_separated(g, A, B, z);
          REQUIRE(fast == reference::d_separated_paths(g, A, B, z));
          REQUIRE(fast == d_separated(g, B, A, z));
        }
      }
    }
  }
}

TEST_CASE("backdoor criterion examples") {
  CHECK(satisfies_backdoor(diet_soda(), "DietCoke", "Fatness", {"Diabetes"}));
  CHECK_FALSE(satisfies_backdoor(diet_soda(), "DietCoke", "Fatness", {}));
  CHECK(satisfies_backdoor(unconfounded(), "X", "Y", {}));
  CHECK_FALSE(satisfies_backdoor(confounded(), "X", "Y", {}));
  // Same answer from d-separation in the graph with X's outgoing edges cut.
  CHECK(satisfies_backdoor(confounded(), "X", "Y", {}) == d_separated(confounded().without_outgoing("X"), {"X"}, {"Y"}, {}));
  CHECK(code_of([] { satisfies_backdoor(confounded(), "X", "X", {}); }) == Errc::OverlappingSets);
  CHECK(code_of([] { satisfies_backdoor(confounded(), "X", "Y", {"Y"}); }) == Errc::OverlappingSets);
}

TEST_CASE("descendants of x are never admissible") {
  const auto g = CausalGraph::build({"X", "M", "Y", "Z"}, {{"Z", "X"}, {"Z", "Y"}, {"X", "M"}, {"M", "Y"}});
  CHECK_FALSE(satisfies_backdoor(g, "X", "Y", {"Z", "M"}));
  CHECK(satisfies_backdoor(g, "X", "Y", {"Z"}));
}

TEST_CASE("find_backdoor_sets examples") {
  CHECK(find_backdoor_sets(diet_soda(), "DietCoke", "Fatness") == std::vector<NodeSet>{{"Diabetes"}});
  CHECK(find_backdoor_sets(unconfounded(), "X", "Y") == std::vector<NodeSet>{{}});
  const auto root = CausalGraph::build({"X", "Y", "W"}, {{"X", "Y"}, {"W", "Y"}});
  CHECK(find_backdoor_sets(root, "X", "Y") == std::vector<NodeSet>{{}});
}

TEST_CASE("find_backdoor_sets returns admissible minimal sets in order") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 80; ++trial) {
    const auto g = fixtures::random_dag(6, 0.45, rng);
    const std::string x = g.name(0), y = g.name(1);
    const auto sets = find_backdoor_sets(g, x, y, 4);
    std::vector<std::string> rest;
    for (const auto& v : g.nodes()) {
      if (v != x && v != y) rest.push_back(v);
    }
    // Oracle: every admissible subset with no admissible strict subset.
    std::vector<NodeSet> expected;
    const auto subsets = all_subsets(rest);
    for (const auto& s : subsets) {
      if (s.size() > 4 || !satisfies_backdoor(g, x, y, s)) continue;
      bool minimal = true;
      for (const auto& t : subsets) {
        if (t.size() < s.size() && std::includes(s.begin(), s.end(), t.begin(), t.end()) &&
            satisfies_backdoor(g, x, y, t)) {
          minimal = false;
          break;
        }
      }
      if (minimal) expected.push_back(s);
    }
    std::sort(expected.begin(), expected.end(), [](const NodeSet& a, const NodeSet& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a < b;
    });
    REQUIRE(sets == expected);
    for (const auto& s : sets) {
      for (const auto& v : s) CHECK_FALSE(g.descendants(x).count(v));
    }
  }
}

TEST_CASE("format_node_set") {
  CHECK(format_node_set({}) == "{}");
  CHECK(format_node_set({"B", "A"}) == "{A, B}");
}
