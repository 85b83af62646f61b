// Serial reference kernels against their OpenMP counterparts. The Threads
// argument sets the team size for the parallel variants.

#include <benchmark/benchmark.h>

#include "pnskit/discovery.hpp"
#include "pnskit/oracle.hpp"
#include "pnskit/parallel.hpp"
#include "pnskit/reference.hpp"

using namespace pnskit;

namespace {

const DiscreteDataset& big_sample() {
  static const DiscreteDataset d = sample(random_scm({4, CovariateRole::Mixed, true}, 3), 1000000, 1);
  return d;
}

const ScmSpec& big_model() {
  // Four covariates with latent confounding: a few thousand exogenous states.
  static const ScmSpec m = random_scm({4, CovariateRole::Confounder, true}, 17);
  return m;
}

void BM_TabulateSerial(benchmark::State& state) {
  const auto& d = big_sample();
  const auto names = d.names();
  for (auto _ : state) benchmark::DoNotOptimize(reference::tabulate_serial(d, names));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.n()));
}

void BM_TabulateParallel(benchmark::State& state) {
  set_thread_count(static_cast<int>(state.range(0)));
  const auto& d = big_sample();
  const auto names = d.names();
  for (auto _ : state) benchmark::DoNotOptimize(tabulate(d, names));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.n()));
}

void BM_EnumerateSerial(benchmark::State& state) {
  const auto& m = big_model();
  for (auto _ : state) benchmark::DoNotOptimize(reference::enumerate_serial(m, "X", "Y"));
  state.counters["states"] = static_cast<double>(m.state_space());
}

void BM_EnumerateParallel(benchmark::State& state) {
  set_thread_count(static_cast<int>(state.range(0)));
  const auto& m = big_model();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_counterfactuals(m, "X", "Y"));
  state.counters["states"] = static_cast<double>(m.state_space());
}

void BM_Skeleton(benchmark::State& state) {
  set_thread_count(static_cast<int>(state.range(0)));
  const auto& d = big_sample();
  const auto names = d.names();
  const auto t = tabulate(d, names);
  for (auto _ : state) benchmark::DoNotOptimize(learn_skeleton(t));
}

}  // namespace

BENCHMARK(BM_TabulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TabulateParallel)->ArgName("threads")->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateParallel)->ArgName("threads")->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Skeleton)->ArgName("threads")->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
