#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "pnskit/error.hpp"
#include "pnskit/oracle.hpp"
#include "pnskit/subgroup.hpp"

using namespace pnskit;

namespace {

// Rows of the two models stacked, with G marking the source model.
DiscreteDataset mixture(const DiscreteDataset& a, const DiscreteDataset& b) {
  std::vector<DiscreteVariable> vars;
  std::vector<std::vector<int>> cols;
  for (std::size_t v = 0; v < a.num_variables(); ++v) {
    vars.push_back(a.variable(v));
    auto col = std::vector<int>(a.column(v).begin(), a.column(v).end());
    const auto other = b.column(b.index_of(a.variable(v).name));
    col.insert(col.end(), other.begin(), other.end());
    cols.push_back(std::move(col));
  }
  vars.push_back({"G", {0, 1}, false});
  std::vector<int> g(a.n(), 0);
  g.insert(g.end(), b.n(), 1);
  cols.push_back(std::move(g));
  return DiscreteDataset(std::move(vars), std::move(cols));
}

DiscreteDataset random_binary(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> names{"X", "Y"};
  for (std::size_t i = 0; i < k; ++i) names.push_back("V" + std::to_string(i));
  std::vector<std::vector<int>> rows;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<int> row;
    for (std::size_t c = 0; c < names.size(); ++c) row.push_back(static_cast<int>(rng() % 2));
    rows.push_back(row);
  }
  return fixtures::binary_dataset(names, rows);
}

}  // namespace

TEST_CASE("required sample sizes") {
  CHECK(required_n(0.05, 0.95) == 385);
  CHECK(required_n(0.10, 0.95) == 97);
  CHECK(required_n(0.05, 0.99) == 664);
  // Independent check of the stated formula.
  for (double conf : {0.90, 0.95, 0.99}) {
    const double z = conf == 0.90 ? 1.645 : conf == 0.95 ? 1.96 : 2.576;
    for (double m : {0.01, 0.02, 0.03, 0.05, 0.1, 0.2}) {
      CHECK(required_n(m, conf) == static_cast<std::size_t>(std::ceil(z * z / (4 * m * m) - 1e-9)));
    }
  }
  CHECK_THROWS_AS(required_n(0.0, 0.95), Error);
  CHECK_THROWS_AS(required_n(1.5, 0.95), Error);
  CHECK_THROWS_AS(required_n(0.05, 0.80), Error);
}

TEST_CASE("spec parsing") {
  const auto s = parse_subgroup_spec("old:Age60=1,Male=0|1");
  CHECK(s.name == "old");
  REQUIRE(s.constraints.size() == 2);
  CHECK(s.constraints[1].levels == std::set<int>{0, 1});
  CHECK(parse_subgroup_spec("Age60=1").name == "Age60=1");
  CHECK_THROWS_AS(parse_subgroup_spec("a:Age60=1,Age60=0"), Error);
  CHECK_THROWS_AS(parse_subgroup_spec("a:Age60"), Error);
}

TEST_CASE("filtering") {
  const auto d = random_binary(500, 3, 1);
  CHECK(filter_subgroup(d, SubgroupSpec{"all", {}}).n() == d.n());
  for (const std::string v : {"V0", "V1", "V2"}) {
    const auto one = filter_subgroup(d, parse_subgroup_spec(v + "=1")).n();
    const auto zero = filter_subgroup(d, parse_subgroup_spec(v + "=0")).n();
    CHECK(one + zero == d.n());
    std::size_t manual = 0;
    for (std::size_t r = 0; r < d.n(); ++r) manual += d.at(r, d.index_of(v)) == 1;
    CHECK(one == manual);
  }
  CHECK_THROWS_AS(filter_subgroup(d, parse_subgroup_spec("Q=1")), Error);
}

TEST_CASE("each subgroup bounds its own exact PNS") {
  RandomScmOptions o;
  o.covariates = 1;
  o.role = CovariateRole::Confounder;
  const auto m0 = random_scm(o, 101), m1 = random_scm(o, 202);
  const auto p0 = enumerate_counterfactuals(m0, "X", "Y"), p1 = enumerate_counterfactuals(m1, "X", "Y");
  const auto d = mixture(sample(m0, 200000, 1), sample(m1, 200000, 2));
  const std::vector<std::string> z{"Z1"};
  for (int g : {0, 1}) {
    const auto rep = analyze_subgroup(d, parse_subgroup_spec("G=" + std::to_string(g)), {{"X", 1}}, {{"Y", 1}}, z);
    const double exact = g == 0 ? p0.exact_pns : p1.exact_pns;
    CHECK(rep.interval.contains(exact, 0.01));
    CHECK(rep.meets_size);
    CHECK(0.0 <= rep.interval.lower);
    CHECK(rep.interval.lower <= rep.interval.upper);
    CHECK(rep.interval.upper <= 1.0);
  }
}

TEST_CASE("undersized groups are flagged, not dropped") {
  const auto d = random_binary(200, 1, 4);
  const auto rep = analyze_subgroup(d, parse_subgroup_spec("V0=1"), {{"X", 1}}, {{"Y", 1}}, {});
  CHECK_FALSE(rep.meets_size);
  CHECK(rep.n == static_cast<double>(rep.rows));
  CHECK(rep.required == 385);
}

TEST_CASE("no stratum-wise effect gives lower bound zero") {
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 40; ++i) rows.push_back({i % 2, (i / 2) % 2, 1});
  const auto d = fixtures::binary_dataset({"X", "Y", "A"}, rows);
  CHECK(analyze_subgroup(d, parse_subgroup_spec("A=1"), {{"X", 1}}, {{"Y", 1}}, {}).interval.lower == 0.0);
}

TEST_CASE("errors name the subgroup") {
  std::vector<std::vector<int>> rows{{1, 1, 0}, {1, 0, 0}, {0, 1, 1}};
  const auto d = fixtures::binary_dataset({"X", "Y", "A"}, rows);
  try {
    analyze_subgroup(d, parse_subgroup_spec("grp:A=0"), {{"X", 1}}, {{"Y", 1}}, {});
    FAIL("no positivity error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PositivityViolation);
    CHECK(std::string(e.what()).find("grp") != std::string::npos);
  }
}

TEST_CASE("scan enumerates, sorts and bounds its output") {
  const auto d = random_binary(4000, 4, 9);
  const std::vector<std::string> cands{"V0", "V1", "V2", "V3"};
  ScanOptions opt;
  const auto one = scan_subgroups(d, cands, {{"X", 1}}, {{"Y", 1}}, {}, opt);
  CHECK(one.candidates == 8);
  CHECK(one.reports.size() <= 2 * cands.size());
  for (std::size_t i = 1; i < one.reports.size(); ++i) {
    const auto& a = one.reports[i - 1];
    const auto& b = one.reports[i];
    CHECK((a.interval.lower > b.interval.lower || (a.interval.lower == b.interval.lower && a.spec.name < b.spec.name)));
  }

  opt.depth = 2;
  const auto two = scan_subgroups(d, cands, {{"X", 1}}, {{"Y", 1}}, {}, opt);
  CHECK(two.candidates == 8 + 6 * 4);
  // Within each variable pair, every row falls in exactly one of the four cells.
  std::size_t pair_rows = 0;
  for (const auto& r : two.reports) {
    if (r.spec.constraints.size() == 2) pair_rows += r.rows;
  }
  CHECK(pair_rows == 6 * d.n());

  opt.min_n = 1000000;
  const auto none = scan_subgroups(d, cands, {{"X", 1}}, {{"Y", 1}}, {}, opt);
  CHECK(none.reports.empty());
  CHECK(none.skipped.size() == none.candidates);

  const auto again = scan_subgroups(d, cands, {{"X", 1}}, {{"Y", 1}}, {}, ScanOptions{2, 0, {}});
  REQUIRE(again.reports.size() == two.reports.size());
  for (std::size_t i = 0; i < again.reports.size(); ++i) CHECK(again.reports[i].spec.name == two.reports[i].spec.name);

  const std::vector<std::string> bad{"X"};
  CHECK_THROWS_AS(scan_subgroups(d, bad, {{"X", 1}}, {{"Y", 1}}, {}, opt), Error);
}

TEST_CASE("table layout") {
  const auto d = random_binary(1000, 1, 2);
  const std::vector<std::string> cands{"V0"};
  const auto res = scan_subgroups(d, cands, {{"X", 1}}, {{"Y", 1}}, {}, ScanOptions{});
  const auto table = format_subgroup_table(res.reports);
  CHECK(table.rfind("Subpopulation", 0) == 0);
  CHECK(table.find("Bounds of PNS") != std::string::npos);
  CHECK(table.find("V0=1") != std::string::npos);
}
