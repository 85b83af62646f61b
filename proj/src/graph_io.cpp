#include "pnskit/graph_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

#include "pnskit/error.hpp"

namespace pnskit {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '#' || c == ',') return false;
  }
  return s.find("->") == std::string_view::npos && s.find("--") == std::string_view::npos;
}

class NodeCollector {
 public:
  void add(const std::string& name) {
    if (seen_.insert(name).second) order_.push_back(name);
  }
  std::vector<std::string> take() { return std::move(order_); }

 private:
  std::unordered_set<std::string> seen_;
  std::vector<std::string> order_;
};

}  // namespace

GraphFile parse_graph_text(std::string_view text) {
  GraphFile out;
  NodeCollector header, endpoints;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  auto fail = [&](const std::string& what) {
    throw Error(Errc::MalformedGraphFile, "line " + std::to_string(line_no) + ": " + what);
  };

  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.substr(0, 6) == "nodes:") {
      std::istringstream in{std::string(line.substr(6))};
      std::string tok;
      while (in >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        if (!valid_name(tok)) fail("invalid node name '" + tok + "'");
        header.add(tok);
      }
      continue;
    }

    bool directed = true;
    auto op = line.find("->");
    if (op == std::string_view::npos) {
      op = line.find("--");
      directed = false;
    }
    if (op == std::string_view::npos) fail("expected 'a -> b', 'a -- b' or 'nodes:'");
    const std::string from(trim(line.substr(0, op)));
    const std::string to(trim(line.substr(op + 2)));
    if (!valid_name(from) || !valid_name(to)) fail("invalid edge '" + std::string(line) + "'");
    endpoints.add(from);
    endpoints.add(to);
    (directed ? out.directed : out.undirected).emplace_back(from, to);
  }

  out.nodes = header.take();
  std::unordered_set<std::string> listed(out.nodes.begin(), out.nodes.end());
  for (auto& n : endpoints.take()) {
    if (!listed.count(n)) out.nodes.push_back(std::move(n));
  }
  return out;
}

std::string write_graph_text(const GraphFile& g) {
  std::string out = "nodes:";
  for (const auto& n : g.nodes) {
    out += ' ';
    out += n;
  }
  out += '\n';
  for (const auto& [a, b] : g.directed) out += a + " -> " + b + "\n";
  for (const auto& [a, b] : g.undirected) out += a + " -- " + b + "\n";
  return out;
}

GraphFile parse_graph_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedGraphFile, e.what());
  }
  GraphFile out;
  try {
    NodeCollector nodes;
    for (const auto& n : doc.value("nodes", nlohmann::json::array())) nodes.add(n.get<std::string>());
    auto read_edges = [&](const char* key, std::vector<NamedEdge>& into) {
      if (!doc.contains(key)) return;
      for (const auto& e : doc.at(key)) {
        if (!e.is_array() || e.size() != 2) throw Error(Errc::MalformedGraphFile, std::string(key) + ": edge must be a pair");
        into.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
    };
    read_edges("edges", out.directed);
    read_edges("undirected", out.undirected);
    for (const auto* list : {&out.directed, &out.undirected}) {
      for (const auto& [a, b] : *list) {
        nodes.add(a);
        nodes.add(b);
      }
    }
    out.nodes = nodes.take();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedGraphFile, e.what());
  }
  return out;
}

std::string write_graph_json(const GraphFile& g) {
  nlohmann::ordered_json doc;
  doc["nodes"] = g.nodes;
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : g.directed) doc["edges"].push_back({a, b});
  if (!g.undirected.empty()) {
    doc["undirected"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : g.undirected) doc["undirected"].push_back({a, b});
  }
  return doc.dump(2) + "\n";
}

GraphFile parse_graph_any(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_graph_json(text);
  return parse_graph_text(text);
}

GraphFile to_graph_file(const CausalGraph& g) { return GraphFile{g.nodes(), g.edges(), {}}; }

CausalGraph to_causal_graph(const GraphFile& f) {
  if (!f.undirected.empty()) {
    throw Error(Errc::MalformedGraphFile,
                "graph has undirected edge " + f.undirected.front().first + " -- " + f.undirected.front().second +
                    "; orient it before using the graph for identification");
  }
  return CausalGraph::build(f.nodes, f.directed);
}

CausalGraph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open graph file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return to_causal_graph(parse_graph_any(buf.str()));
}

std::string write_graph_dot(const GraphFile& g) {
  std::string out = "digraph G {\n";
  for (const auto& n : g.nodes) out += "  \"" + n + "\";\n";
  for (const auto& [a, b] : g.directed) out += "  \"" + a + "\" -> \"" + b + "\";\n";
  for (const auto& [a, b] : g.undirected) out += "  \"" + a + "\" -> \"" + b + "\" [dir=none];\n";
  return out + "}\n";
}

}  // namespace pnskit
