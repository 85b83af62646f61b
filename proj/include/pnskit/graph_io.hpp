#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/graph.hpp"

namespace pnskit {

// Contents of a graph file. Undirected edges (`a -- b`) only appear in
// discovery output; a CausalGraph cannot hold them.
struct GraphFile {
  std::vector<std::string> nodes;
  std::vector<NamedEdge> directed;
  std::vector<NamedEdge> undirected;

  friend bool operator==(const GraphFile&, const GraphFile&) = default;
};

// Line format:
//
//   # comment
//   nodes: A B C
//   A -> B
//   B -- C
//
// Node order is: names listed on `nodes:` lines first, then edge endpoints in
// order of first appearance. Throws MalformedGraphFile with the line number.
GraphFile parse_graph_text(std::string_view text);
std::string write_graph_text(const GraphFile& g);

// Key-value tree form: {"nodes": [...], "edges": [[a, b], ...], "undirected": [[a, b], ...]}.
GraphFile parse_graph_json(std::string_view text);
std::string write_graph_json(const GraphFile& g);

// Picks the JSON reader when the first non-blank character is '{'.
GraphFile parse_graph_any(std::string_view text);

GraphFile to_graph_file(const CausalGraph& g);
// Throws MalformedGraphFile if the file carries undirected edges.
CausalGraph to_causal_graph(const GraphFile& f);

CausalGraph read_graph(const std::filesystem::path& path);

// Graphviz rendering; undirected edges are drawn without arrowheads.
std::string write_graph_dot(const GraphFile& g);

}  // namespace pnskit
