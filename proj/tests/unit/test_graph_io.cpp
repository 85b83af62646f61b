#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "pnskit/error.hpp"
#include "pnskit/graph_io.hpp"

using namespace pnskit;

TEST_CASE("text format parses nodes, edges and comments") {
  const auto f = parse_graph_text("# header\nnodes: Q A\nA -> B  # trailing\nB -- C\n\n");
  CHECK(f.nodes == std::vector<std::string>{"Q", "A", "B", "C"});
  CHECK(f.directed == std::vector<NamedEdge>{{"A", "B"}});
  CHECK(f.undirected == std::vector<NamedEdge>{{"B", "C"}});
}

TEST_CASE("malformed text names the line") {
  try {
    parse_graph_text("A -> B\nA B\n");
    FAIL("accepted a bad line");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedGraphFile);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("text and tree forms round-trip exactly") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto g = fixtures::random_dag(2 + i % 7, 0.5, rng);
    GraphFile f = to_graph_file(g);
    if (i % 3 == 0 && f.nodes.size() >= 2) f.undirected.push_back({f.nodes[0], f.nodes[1]});
    const std::string text = write_graph_text(f);
    CHECK(parse_graph_text(text) == f);
    CHECK(write_graph_text(parse_graph_text(text)) == text);
    const std::string tree = write_graph_json(f);
    CHECK(parse_graph_json(tree) == f);
    CHECK(write_graph_json(parse_graph_json(tree)) == tree);
    CHECK(parse_graph_any(tree) == f);
    CHECK(parse_graph_any(text) == f);
    if (f.undirected.empty()) CHECK(to_causal_graph(f) == g);
  }
}

TEST_CASE("undirected edges cannot become a DAG") {
  GraphFile f;
  f.nodes = {"A", "B"};
  f.undirected = {{"A", "B"}};
  CHECK_THROWS_AS(to_causal_graph(f), Error);
}

TEST_CASE("shipped graph files load") {
  const auto g = read_graph(std::string(PNSKIT_SOURCE_DIR) + "/data/graphs/diet_soda.txt");
  CHECK(g.size() == 3);
  CHECK(g.has_edge(g.index("Diabetes"), g.index("DietCoke")));
  CHECK(read_graph(std::string(PNSKIT_SOURCE_DIR) + "/data/graphs/confounded.txt").edges().size() == 3);
  CHECK(read_graph(std::string(PNSKIT_SOURCE_DIR) + "/data/graphs/unconfounded.txt").edges().size() == 2);
}

TEST_CASE("dot output draws both edge kinds") {
  GraphFile f;
  f.nodes = {"A", "B", "C"};
  f.directed = {{"A", "B"}};
  f.undirected = {{"B", "C"}};
  const auto dot = write_graph_dot(f);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("\"A\" -> \"B\"") != std::string::npos);
  CHECK(dot.find("dir=none") != std::string::npos);
}
