#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "pnskit/cli.hpp"
#include "pnskit/discrete_dataset.hpp"
#include "pnskit/oracle.hpp"
#include "pnskit/xpt.hpp"

using namespace pnskit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "pns-toolkit");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kSource = PNSKIT_SOURCE_DIR;

fs::path scratch() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("pnskit_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string sample_file() {
  static const std::string path = [] {
    const auto p = (scratch() / "sample.json").string();
    write_dataset(sample(random_scm({2, CovariateRole::Confounder, false}, 7), 20000, 3), p);
    return p;
  }();
  return path;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("identify prints the confounder") {
  const auto r = run({"identify", "--graph", kSource + "/data/graphs/diet_soda.txt", "--x", "DietCoke", "--y", "Fatness"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("\n{Diabetes}\n") != std::string::npos);
  CHECK(r.out.find("# graph: ") != std::string::npos);
}

TEST_CASE("usage errors exit 1 and name the flag") {
  const auto r = run({"pns", "--dataset", "d.json", "--x", "X=1"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("--y") != std::string::npos);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"pns", "--dataset", sample_file(), "--x", "X", "--y", "Y=1"}).code == cli::kExitUsage);
}

TEST_CASE("data errors exit 2 with the error name") {
  const auto missing = run({"do", "--dataset", (scratch() / "nope.json").string(), "--x", "X=1", "--y", "Y=1"});
  CHECK(missing.code == cli::kExitData);
  CHECK(missing.err.find("IoError") != std::string::npos);

  const auto unknown = run({"do", "--dataset", sample_file(), "--x", "Q=1", "--y", "Y=1"});
  CHECK(unknown.code == cli::kExitData);
  CHECK(unknown.err.find("UnknownVariable") != std::string::npos);

  const auto nonbinary = run({"oracle", "--scm", kSource + "/data/scm/salary.json", "--x", "X", "--y", "Z"});
  CHECK(nonbinary.code == cli::kExitData);
  CHECK(nonbinary.err.find("NonBinaryVariable") != std::string::npos);
}

TEST_CASE("structured output is byte-identical across thread counts") {
  const std::vector<std::vector<std::string>> commands{
      {"pns", "--dataset", sample_file(), "--x", "X=1", "--y", "Y=1", "--adjust", "Z1,Z2", "--method", "all"},
      {"discover", "--dataset", sample_file()},
      {"subgroups", "--dataset", sample_file(), "--x", "X=1", "--y", "Y=1", "--adjust", "Z1", "--vars", "Z2"},
      {"oracle", "--random", "--covariates", "3", "--seed", "11"},
      {"validate", "--seeds", "40", "--sampled-seeds", "4", "--sample-size", "2000"},
  };
  for (const auto& cmd : commands) {
    std::vector<std::string> one{"--json", "--threads", "1"}, many{"--json", "--threads", "4"};
    one.insert(one.end(), cmd.begin(), cmd.end());
    many.insert(many.end(), cmd.begin(), cmd.end());
    const auto a = run(one), b = run(many);
    INFO(cmd.front());
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    CHECK(a.out.find("\"version\": \"v1\"") != std::string::npos);
  }
}

TEST_CASE("probabilities print with ten decimals") {
  const auto r = run({"do", "--dataset", sample_file(), "--x", "X=1", "--y", "Y=1", "--adjust", "Z1,Z2"});
  REQUIRE(r.code == cli::kExitOk);
  const std::string label = "P(Y=1 | do(X=1)) = 0.";
  const auto pos = r.out.find(label);
  REQUIRE(pos != std::string::npos);
  const auto digits = pos + label.size();
  CHECK(r.out.find_first_not_of("0123456789", digits) - digits == 10);
}

TEST_CASE("oracle emits a model that reads back") {
  const auto path = (scratch() / "model.json").string();
  const auto r = run({"oracle", "--random", "--covariates", "2", "--seed", "7", "--emit-scm", path});
  REQUIRE(r.code == cli::kExitOk);
  const auto m = read_scm(path);
  CHECK(m.seed == 7u);
  const auto again = run({"oracle", "--scm", path});
  CHECK(again.code == cli::kExitOk);
}

TEST_CASE("ingest, recode and analyse end to end") {
  using fixtures::XptVar;
  std::vector<std::vector<Cell>> demo, exam, lab;
  for (int i = 0; i < 400; ++i) {
    const double seqn = 1000 + i;
    demo.push_back({seqn, static_cast<double>(20 + i % 60), static_cast<double>(1 + i % 2)});
    exam.push_back({seqn, 22.0 + (i * 7 % 17)});
    lab.push_back({seqn, 5.0 + (i * 3 % 30) / 10.0});
  }
  write_bytes(scratch() / "demo.xpt", fixtures::write_xpt("DEMO_C", {{"SEQN"}, {"RIDAGEYR"}, {"RIAGENDR"}}, demo));
  write_bytes(scratch() / "bmx.xpt", fixtures::write_xpt("BMX_C", {{"SEQN"}, {"BMXBMI"}}, exam));
  write_bytes(scratch() / "ghb.xpt", fixtures::write_xpt("L10_C", {{"SEQN"}, {"LBXGH"}}, lab));
  const auto cfg = scratch() / "recode.json";
  std::ofstream(cfg) << R"({"rules": [
    {"target": "Fatness", "source": "BMXBMI", "op": "ge", "value": 30.0},
    {"target": "Diabetes", "source": "LBXGH", "op": "ge", "value": 6.5},
    {"target": "Age60", "source": "RIDAGEYR", "op": "ge", "value": 60},
    {"target": "Male", "source": "RIAGENDR", "op": "map", "map": {"1": 1, "2": 0}}]})";
  const auto out = (scratch() / "ingested.json").string();
  const auto r = run({"ingest", "--xpt", (scratch() / "demo.xpt").string(), (scratch() / "bmx.xpt").string(),
                      (scratch() / "ghb.xpt").string(), "--recode", cfg.string(), "--out", out});
  INFO(r.err);
  REQUIRE(r.code == cli::kExitOk);
  const auto d = read_dataset(out);
  CHECK(d.n() == 400);
  CHECK(d.names() == std::vector<std::string>{"Fatness", "Diabetes", "Age60", "Male"});

  const auto sg = run({"subgroups", "--dataset", out, "--x", "Male=1", "--y", "Fatness=1", "--adjust", "Diabetes",
                       "--vars", "Age60", "--out", (scratch() / "report").string()});
  CHECK(sg.code == cli::kExitOk);
  CHECK(fs::exists(scratch() / "report.txt"));
  CHECK(fs::exists(scratch() / "report.json"));
}

TEST_CASE("validate reports zero violations") {
  const auto r = run({"validate", "--seeds", "60", "--covariates", "2", "--sampled-seeds", "10", "--sample-size", "100000"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("violations=0") != std::string::npos);
}

TEST_CASE("thread count from the environment") {
  ::setenv("PNS_TOOLKIT_THREADS", "2", 1);
  const auto r = run({"--json", "oracle", "--random", "--seed", "3"});
  ::unsetenv("PNS_TOOLKIT_THREADS");
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == run({"--json", "--threads", "1", "oracle", "--random", "--seed", "3"}).out);
}
