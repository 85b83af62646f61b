#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "pnskit/error.hpp"
#include "pnskit/estimate.hpp"
#include "pnskit/oracle.hpp"
#include "pnskit/reference.hpp"

using namespace pnskit;
using Catch::Matchers::WithinAbs;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IoError;
}

std::vector<double> dyadic(std::mt19937_64& rng, std::size_t k) {
  std::vector<int> w(k, 1);
  for (int extra = 0; extra < 16 - static_cast<int>(k); ++extra) ++w[rng() % k];
  std::vector<double> p;
  for (int v : w) p.push_back(v / 16.0);
  return p;
}

std::vector<int> random_table(std::mt19937_64& rng, std::size_t n) {
  std::vector<int> t(n);
  for (int& v : t) v = static_cast<int>(rng() % 2);
  return t;
}

}  // namespace

TEST_CASE("wire model has PNS one") {
  const auto m = ScmSpec::build({{"U1", {0.5, 0.5}}}, {{"X", 2, {}, {"U1"}, {0, 1}}, {"Y", 2, {"X"}, {}, {0, 1}}});
  const auto p = enumerate_counterfactuals(m, "X", "Y");
  CHECK(p.exact_pns == 1.0);
  CHECK(p.p_yx == 1.0);
  CHECK(p.p_yxp == 0.0);
}

TEST_CASE("outcome ignoring treatment has PNS zero") {
  const auto m = ScmSpec::build({{"U1", {0.5, 0.5}}, {"U2", {0.25, 0.75}}},
                                {{"X", 2, {}, {"U1"}, {0, 1}}, {"Y", 2, {}, {"U2"}, {0, 1}}});
  const auto p = enumerate_counterfactuals(m, "X", "Y");
  CHECK(p.exact_pns == 0.0);
  CHECK(p.p_yx == 0.75);
}

TEST_CASE("confounded model agrees with a hand enumeration") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t kz = 2 + rng() % 2, kx = 2 + rng() % 3, ky = 2 + rng() % 3;
    const auto pz = dyadic(rng, kz), px = dyadic(rng, kx), py = dyadic(rng, ky);
    const auto fz = random_table(rng, kz);
    const auto fx = random_table(rng, 2 * kx);      // [z][ux]
    const auto fy = random_table(rng, 2 * 2 * ky);  // [z][x][uy]
    const auto m = ScmSpec::build({{"U_z", pz}, {"U_x", px}, {"U_y", py}},
                                  {{"Z", 2, {}, {"U_z"}, fz}, {"X", 2, {"Z"}, {"U_x"}, fx}, {"Y", 2, {"Z", "X"}, {"U_y"}, fy}});
    const auto prof = enumerate_counterfactuals(m, "X", "Y");

    double p_yx = 0, p_yxp = 0, pns = 0, joint[2][2][2] = {};
    for (std::size_t uz = 0; uz < kz; ++uz) {
      for (std::size_t ux = 0; ux < kx; ++ux) {
        for (std::size_t uy = 0; uy < ky; ++uy) {
          const double p = pz[uz] * px[ux] * py[uy];
          const int z = fz[uz];
          const int x = fx[z * kx + ux];
          const int y1 = fy[(z * 2 + 1) * ky + uy];
          const int y0 = fy[(z * 2 + 0) * ky + uy];
          const int y = x ? y1 : y0;
          p_yx += p * y1;
          p_yxp += p * y0;
          pns += p * (y1 == 1 && y0 == 0);
          joint[z][x][y] += p;
        }
      }
    }
    CHECK_THAT(prof.p_yx, WithinAbs(p_yx, 1e-12));
    CHECK_THAT(prof.p_yxp, WithinAbs(p_yxp, 1e-12));
    CHECK_THAT(prof.exact_pns, WithinAbs(pns, 1e-12));
    for (int z = 0; z < 2; ++z) {
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
          CHECK_THAT(prof.observational.count({{"Z", z}, {"X", x}, {"Y", y}}), WithinAbs(joint[z][x][y], 1e-12));
        }
      }
    }
    CHECK(prof.exact_pns <= std::min(prof.p_yx, 1.0 - prof.p_yxp) + 1e-12);
  }
}

TEST_CASE("chunked enumeration matches the serial reference") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_scm({seed % 5, static_cast<CovariateRole>(seed % 3), seed % 2 == 1}, seed);
    const auto a = enumerate_counterfactuals(m, "X", "Y");
    const auto b = reference::enumerate_serial(m, "X", "Y");
    CHECK_THAT(a.exact_pns, WithinAbs(b.exact_pns, 1e-14));
    CHECK_THAT(a.p_yx, WithinAbs(b.p_yx, 1e-14));
    REQUIRE(a.observational.num_cells() == b.observational.num_cells());
    for (std::size_t i = 0; i < a.observational.num_cells(); ++i) {
      CHECK_THAT(a.observational.weights()[i], WithinAbs(b.observational.weights()[i], 1e-14));
    }
  }
}

TEST_CASE("consistency rule on unconfounded models") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomScmOptions o;
    o.covariates = seed % 3;
    o.role = CovariateRole::OutcomeOnly;
    const auto m = random_scm(o, seed);
    const auto prof = enumerate_counterfactuals(m, "X", "Y");
    REQUIRE(satisfies_backdoor(m.graph(), "X", "Y", {}));
    CHECK_THAT(prof.p_yx, WithinAbs(prob(prof.observational, {{"Y", 1}}, {{"X", 1}}).value, 1e-12));
    CHECK_THAT(prof.p_yxp, WithinAbs(prob(prof.observational, {{"Y", 1}}, {{"X", 0}}).value, 1e-12));
  }
}

TEST_CASE("exact PNS sits inside the population bound arguments") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto m = random_scm({seed % 5, static_cast<CovariateRole>(seed % 3), seed % 4 == 3}, seed * 7 + 1);
    const auto prof = enumerate_counterfactuals(m, "X", "Y");
    const auto iv = tian_pearl_bounds(prof.quantities());
    CHECK(iv.contains(prof.exact_pns, 1e-9));
  }
}

TEST_CASE("intervention cuts only the treatment's inputs") {
  // X copies Z; Y depends on X and on its own noise only.
  const auto m = ScmSpec::build({{"U_Z", {0.5, 0.5}}, {"U_Y", {0.25, 0.75}}},
                                {{"Z", 2, {}, {"U_Z"}, {0, 1}},
                                 {"X", 2, {"Z"}, {}, {0, 1}},
                                 {"Y", 2, {"X"}, {"U_Y"}, {0, 1, 1, 0}}});
  const std::size_t xi = m.endogenous_index("X"), yi = m.endogenous_index("Y"), zi = m.endogenous_index("Z");
  std::vector<int> out;
  for (int uz : {0, 1}) {
    for (int uy : {0, 1}) {
      const std::vector<int> u{uz, uy};
      m.evaluate(u, out, std::pair{xi, 1});
      CHECK(out[xi] == 1);
      CHECK(out[zi] == uz);
      CHECK(out[yi] == (1 ^ uy));
    }
  }
}

TEST_CASE("sampling is deterministic and converges") {
  const auto m = random_scm({2, CovariateRole::Confounder, false}, 21);
  const auto a = sample(m, 1000, 99);
  const auto b = sample(m, 1000, 99);
  CHECK(a == b);
  CHECK(a.metadata.at("prng") == std::string(kPrngAlgorithm));
  CHECK(sample(m, 1, 1).n() == 1);
  CHECK_FALSE(sample(m, 1000, 100) == a);

  const auto prof = enumerate_counterfactuals(m, "X", "Y");
  const auto big = sample(m, 1000000, 7);
  const auto names = big.names();
  const auto t = tabulate(big, names);
  const auto& exact = prof.observational;
  REQUIRE(t.num_cells() == exact.num_cells());
  for (std::size_t i = 0; i < t.num_cells(); ++i) {
    CHECK_THAT(t.weights()[i] / t.total(), WithinAbs(exact.weights()[i], 0.01));
  }
}

TEST_CASE("random models are reproducible and well formed") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RandomScmOptions o;
    o.covariates = seed % 5;
    o.role = CovariateRole::Confounder;
    const auto a = random_scm(o, seed);
    CHECK(write_scm_json(a) == write_scm_json(random_scm(o, seed)));
    CHECK(a.seed == seed);
    const auto z = random_scm_covariates(a);
    CHECK(z.size() == o.covariates);
    CHECK(satisfies_backdoor(a.graph(), "X", "Y", NodeSet(z.begin(), z.end())));
    for (const auto& v : z) CHECK_FALSE(a.graph().descendants("X").count(v));
  }
  CHECK(code_of([] { random_scm({5}, 1); }) == Errc::InvalidScm);
}

TEST_CASE("model validation") {
  CHECK(code_of([] { ScmSpec::build({{"U", {0.5, 0.4}}}, {{"X", 2, {}, {"U"}, {0, 1}}}); }) == Errc::InvalidScm);
  CHECK(code_of([] { ScmSpec::build({{"U", {0.5, 0.5}}}, {{"X", 2, {}, {"U"}, {0}}}); }) == Errc::InvalidScm);
  CHECK(code_of([] { ScmSpec::build({{"U", {0.5, 0.5}}}, {{"X", 2, {}, {"U"}, {0, 2}}}); }) == Errc::InvalidScm);
  CHECK(code_of([] {
          ScmSpec::build({}, {{"A", 2, {"B"}, {}, {0, 1}}, {"B", 2, {"A"}, {}, {0, 1}}});
        }) == Errc::CycleDetected);
  const auto m = random_scm({4}, 3);
  CHECK(code_of([&] { enumerate_counterfactuals(m, "X", "Y", 4); }) == Errc::StateSpaceTooLarge);
}

TEST_CASE("model files round-trip") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = random_scm({seed % 5, CovariateRole::Mixed, seed % 2 == 0}, seed);
    const auto text = write_scm_json(m);
    const auto back = parse_scm_json(text);
    CHECK(write_scm_json(back) == text);
    CHECK(enumerate_counterfactuals(back, "X", "Y").exact_pns == enumerate_counterfactuals(m, "X", "Y").exact_pns);
  }
}

TEST_CASE("salary fixture parses") {
  const auto m = read_scm(std::string(PNSKIT_SOURCE_DIR) + "/data/scm/salary.json");
  const auto& z = m.mechanism("Z");
  CHECK(z.cardinality == 11);
  std::vector<int> out;
  const std::vector<int> u{2, 1};
  m.evaluate(u, out);
  CHECK(out[m.endogenous_index("Z")] == 2 * 2 + 3 * 1);
  CHECK(code_of([&] { enumerate_counterfactuals(m, "X", "Z"); }) == Errc::NonBinaryVariable);
}

TEST_CASE("split seeds differ per stream") {
  CHECK(split_seed(1, 0) != split_seed(1, 1));
  CHECK(split_seed(1, 0) != split_seed(2, 0));
  CHECK(split_seed(5, 9) == split_seed(5, 9));
}
