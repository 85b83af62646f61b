#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "pnskit/discrete_dataset.hpp"
#include "pnskit/error.hpp"
#include "pnskit/recode.hpp"

using namespace pnskit;

namespace {

const RecodeConfig& shipped() {
  static const RecodeConfig cfg = read_recode_config(std::string(PNSKIT_SOURCE_DIR) + "/data/recode/nhanes_2003_2006.json");
  return cfg;
}

RecodeConfig only(const std::string& target) {
  RecodeConfig cfg;
  for (const auto& r : shipped().rules) {
    if (r.target == target) cfg.rules.push_back(r);
  }
  REQUIRE(cfg.rules.size() == 1);
  return cfg;
}

RawTable column(const std::string& name, const std::vector<Cell>& cells) {
  RawTable t;
  t.schema = {{name}};
  for (const auto& c : cells) t.rows.push_back({c});
  return t;
}

std::vector<int> values(const DiscreteDataset& d, const std::string& name) {
  const auto col = d.column(d.index_of(name));
  return {col.begin(), col.end()};
}

}  // namespace

TEST_CASE("obesity threshold") {
  const auto r = apply_recode(column("BMXBMI", {31.2, 29.9, 30.0}), only("Fatness"));
  CHECK(values(r.dataset, "Fatness") == std::vector<int>{1, 0, 1});
}

TEST_CASE("diabetes threshold keeps prediabetes at zero") {
  const auto r = apply_recode(column("LBXGH", {6.5, 6.4, 5.8, 9.0}), only("Diabetes"));
  CHECK(values(r.dataset, "Diabetes") == std::vector<int>{1, 0, 0, 1});
}

TEST_CASE("diet soda frequency codes") {
  RecodeConfig cfg = only("DietCoke");
  const auto r = apply_recode(column("FFQ_DIETCOKE", {1.0, 2.0, 3.0, 4.0, 5.0}), cfg);
  CHECK(values(r.dataset, "DietCoke") == std::vector<int>{0, 1, 1, 1, 1});

  // Questionnaire refusal and don't-know codes are missing and dropped.
  const auto m = apply_recode(column("FFQ_DIETCOKE", {1.0, 7.0, 9.0, 2.0, Cell{}}), cfg);
  CHECK(values(m.dataset, "DietCoke") == std::vector<int>{0, 1});
  CHECK(m.dropped_rows == 3);

  try {
    apply_recode(column("FFQ_DIETCOKE", {6.0}), cfg);
    FAIL("accepted an unmapped code");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnmappedValue);
  }
}

TEST_CASE("hyperlipidemia fires on any threshold") {
  RawTable t;
  t.schema = {{"LBXTC"}, {"LBDLDL"}, {"LBXTR"}};
  t.rows = {{241.0, 100.0, 100.0}, {200.0, 160.0, 100.0}, {200.0, 100.0, 201.0},
            {240.0, 159.0, 200.0}, {Cell{}, 170.0, Cell{}}, {Cell{}, Cell{}, Cell{}},
            {200.0, Cell{}, 100.0}};
  const auto r = apply_recode(t, only("Hyperlipidemia"));
  // Missing sources are kept; a decided true wins, otherwise the row stays missing.
  CHECK(values(r.dataset, "Hyperlipidemia") == std::vector<int>{1, 1, 1, 0, 1, kMissingLevel, kMissingLevel});
  CHECK(r.dataset.variable(0).allows_missing);
}

TEST_CASE("drop policy leaves no missing cells") {
  RawTable t;
  t.schema = {{"BMXBMI"}, {"LBXGH"}, {"RIDAGEYR"}, {"RIAGENDR"}};
  std::mt19937_64 rng(8);
  for (int i = 0; i < 300; ++i) {
    auto maybe = [&](double v) { return rng() % 7 == 0 ? Cell{} : Cell{v}; };
    t.rows.push_back({maybe(20 + rng() % 20), maybe(5.0 + (rng() % 30) / 10.0), maybe(rng() % 80),
                      maybe(1.0 + rng() % 2)});
  }
  RecodeConfig cfg;
  for (const auto& r : shipped().rules) {
    if (r.target != "DietCoke" && r.target != "Hyperlipidemia") cfg.rules.push_back(r);
  }
  const auto r = apply_recode(t, cfg);
  CHECK(r.dataset.count_missing() == 0);
  CHECK(r.dataset.n() + r.dropped_rows == t.num_rows());

  // Row order does not change what each row becomes.
  RawTable rev = t;
  std::reverse(rev.rows.begin(), rev.rows.end());
  const auto rr = apply_recode(rev, cfg);
  for (const auto& v : r.dataset.names()) {
    auto a = values(r.dataset, v), b = values(rr.dataset, v);
    std::reverse(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_recode_config(R"({"rules": [{"target": "T", "source": "S", "op": "approx", "value": 1}]})"),
                  Error);
  CHECK_THROWS_AS(parse_recode_config(R"({"rules": [{"target": "T", "source": "S", "op": "map", "map": {"1": 2}}]})"),
                  Error);
  try {
    apply_recode(column("OTHER", {1.0}), only("Fatness"));
    FAIL("accepted a missing source");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownVariable);
  }
}

TEST_CASE("dataset file round-trip") {
  auto d = fixtures::adjustment_example();
  d.metadata["generator"] = "test";
  const auto back = parse_dataset_json(write_dataset_json(d));
  CHECK(back == d);
  CHECK(back.metadata.at("generator") == "test");
  CHECK(write_dataset_json(back) == write_dataset_json(d));

  const auto csv = parse_dataset_csv("A,B\n1,0\n,1\n0,1\n");
  CHECK(csv.n() == 3);
  CHECK(csv.at(1, 0) == kMissingLevel);
  CHECK(csv.variable(0).allows_missing);
}
