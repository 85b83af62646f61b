#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace fixtures {

using namespace pnskit;

std::array<std::uint8_t, 8> encode_ibm(double v) {
  std::array<std::uint8_t, 8> out{};
  if (v == 0.0) {
    if (std::signbit(v)) out[0] = 0x80;
    return out;
  }
  int e2 = 0;
  const double m = std::frexp(std::abs(v), &e2);  // |v| = m * 2^e2, m in [0.5, 1)
  const int e16 = e2 >= 0 ? (e2 + 3) / 4 : -((-e2) / 4);
  const int shift = 4 * e16 - e2;  // 0..3
  if (e16 + 64 < 0 || e16 + 64 > 127) throw std::range_error("value outside IBM range");
  auto fraction = static_cast<std::uint64_t>(std::ldexp(m, 53));
  fraction <<= (3 - shift);
  out[0] = static_cast<std::uint8_t>((v < 0 ? 0x80 : 0) | (e16 + 64));
  for (int i = 7; i >= 1; --i) {
    out[i] = static_cast<std::uint8_t>(fraction & 0xff);
    fraction >>= 8;
  }
  return out;
}

namespace {

void put(std::vector<std::uint8_t>& buf, const std::string& s, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) buf.push_back(i < s.size() ? static_cast<std::uint8_t>(s[i]) : ' ');
}

void record(std::vector<std::uint8_t>& buf, const std::string& s) { put(buf, s, 80); }

void pad80(std::vector<std::uint8_t>& buf, std::uint8_t fill) {
  while (buf.size() % 80 != 0) buf.push_back(fill);
}

void be16(std::vector<std::uint8_t>& buf, unsigned v) {
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
  buf.push_back(static_cast<std::uint8_t>(v));
}

std::string zeros(std::size_t n) { return std::string(n, '0'); }

}  // namespace

std::vector<std::uint8_t> write_xpt(const std::string& member, const std::vector<XptVar>& vars,
                                    const std::vector<std::vector<Cell>>& rows) {
  std::vector<std::uint8_t> buf;
  const std::string stamp = "01JAN24:00:00:00";
  record(buf, "HEADER RECORD*******LIBRARY HEADER RECORD!!!!!!!" + zeros(30));
  record(buf, "SAS     SAS     SASLIB  9.4     X64_7PRO" + std::string(24, ' ') + stamp);
  record(buf, stamp);
  record(buf, "HEADER RECORD*******MEMBER  HEADER RECORD!!!!!!!" + zeros(17) + "16" + zeros(8) + "140");
  record(buf, "HEADER RECORD*******DSCRPTR HEADER RECORD!!!!!!!" + zeros(30));
  std::string d1 = "SAS     ";
  d1 += (member + std::string(8, ' ')).substr(0, 8);
  d1 += "SASDATA 9.4     X64_7PRO" + std::string(24, ' ') + stamp;
  record(buf, d1);
  record(buf, stamp + std::string(16, ' ') + member + " fixture");
  char nv[5];
  std::snprintf(nv, sizeof nv, "%04zu", vars.size());
  record(buf, "HEADER RECORD*******NAMESTR HEADER RECORD!!!!!!!000000" + std::string(nv) + zeros(20));

  std::size_t pos = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto& v = vars[i];
    be16(buf, v.numeric ? 1 : 2);
    be16(buf, 0);
    be16(buf, static_cast<unsigned>(v.length));
    be16(buf, static_cast<unsigned>(i + 1));
    put(buf, v.name, 8);
    put(buf, v.label, 40);
    put(buf, "", 8);
    for (int k = 0; k < 4; ++k) be16(buf, 0);
    put(buf, "", 8);
    be16(buf, 0);
    be16(buf, 0);
    for (int k = 3; k >= 0; --k) buf.push_back(static_cast<std::uint8_t>(pos >> (8 * k)));
    for (int k = 0; k < 52; ++k) buf.push_back(0);
    pos += v.length;
  }
  pad80(buf, ' ');
  record(buf, "HEADER RECORD*******OBS     HEADER RECORD!!!!!!!" + zeros(30));

  for (const auto& row : rows) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const auto& v = vars[i];
      const Cell& c = row.at(i);
      if (v.numeric) {
        if (is_missing(c)) {
          buf.push_back('.');
          for (std::size_t k = 1; k < v.length; ++k) buf.push_back(0);
        } else {
          const auto bytes = encode_ibm(std::get<double>(c));
          for (std::size_t k = 0; k < v.length; ++k) buf.push_back(bytes[k]);
        }
      } else {
        put(buf, is_missing(c) ? std::string() : std::get<std::string>(c), v.length);
      }
    }
  }
  pad80(buf, ' ');
  return buf;
}

DiscreteDataset binary_dataset(const std::vector<std::string>& names, const std::vector<std::vector<int>>& rows) {
  std::vector<DiscreteVariable> vars;
  for (const auto& n : names) vars.push_back({n, {0, 1}, false});
  std::vector<std::vector<int>> cols(names.size());
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < names.size(); ++i) cols[i].push_back(r.at(i));
  }
  return DiscreteDataset(std::move(vars), std::move(cols));
}

DiscreteDataset adjustment_example() {
  struct Cellcount {
    int z, x, y, n;
  };
  const Cellcount counts[] = {{0, 0, 0, 30}, {0, 0, 1, 10}, {0, 1, 0, 10}, {0, 1, 1, 10},
                              {1, 0, 0, 5},  {1, 0, 1, 5},  {1, 1, 0, 10}, {1, 1, 1, 20}};
  std::vector<std::vector<int>> rows;
  for (const auto& c : counts) {
    for (int i = 0; i < c.n; ++i) rows.push_back({c.x, c.y, c.z});
  }
  return binary_dataset({"X", "Y", "Z"}, rows);
}

const char* structure_name(Structure s) {
  switch (s) {
    case Structure::Chain: return "chain";
    case Structure::Fork: return "fork";
    case Structure::Collider: return "collider";
  }
  return "?";
}

namespace {

Mechanism root(const std::string& name) { return {name, 2, {}, {"U_" + name}, {0, 1}}; }

// Copy of the single parent, flipped by noise.
Mechanism noisy_copy(const std::string& name, const std::string& parent) {
  return {name, 2, {parent}, {"N_" + name}, {0, 1, 1, 0}};
}

}  // namespace

ScmSpec structure_scm(Structure s) {
  const std::vector<double> fair{0.5, 0.5};
  const std::vector<double> noise{13.0 / 16, 3.0 / 16};
  switch (s) {
    case Structure::Chain:
      return ScmSpec::build({{"U_A", fair}, {"N_B", noise}, {"N_C", noise}},
                            {root("A"), noisy_copy("B", "A"), noisy_copy("C", "B")});
    case Structure::Fork:
      return ScmSpec::build({{"U_A", fair}, {"N_B", noise}, {"N_C", noise}},
                            {root("A"), noisy_copy("B", "A"), noisy_copy("C", "A")});
    case Structure::Collider:
      // C = (A or B) flipped by noise; index = A*4 + B*2 + N.
      return ScmSpec::build({{"U_A", fair}, {"U_B", fair}, {"N_C", noise}},
                            {root("A"), root("B"), {"C", 2, {"A", "B"}, {"N_C"}, {0, 1, 1, 0, 1, 0, 1, 0}}});
  }
  throw std::logic_error("structure");
}

CausalGraph structure_graph(Structure s) {
  switch (s) {
    case Structure::Chain: return CausalGraph::build({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
    case Structure::Fork: return CausalGraph::build({"A", "B", "C"}, {{"A", "B"}, {"A", "C"}});
    case Structure::Collider: return CausalGraph::build({"A", "B", "C"}, {{"A", "C"}, {"B", "C"}});
  }
  throw std::logic_error("structure");
}

CausalGraph dag_from_mask(std::size_t n, std::uint64_t mask) {
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("N" + std::to_string(i));
  std::vector<NamedEdge> edges;
  std::size_t bit = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++bit) {
      if (mask & (std::uint64_t{1} << bit)) edges.emplace_back(nodes[i], nodes[j]);
    }
  }
  return CausalGraph::build(nodes, edges);
}

CausalGraph random_dag(std::size_t n, double edge_prob, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(edge_prob);
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("N" + std::to_string(i));
  std::vector<NamedEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (coin(rng)) edges.emplace_back(nodes[order[i]], nodes[order[j]]);
    }
  }
  return CausalGraph::build(nodes, edges);
}

}  // namespace fixtures
