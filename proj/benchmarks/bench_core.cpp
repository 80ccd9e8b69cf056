#include <benchmark/benchmark.h>

#include <vector>

#include "prefpower/allocation.hpp"
#include "prefpower/detectability.hpp"
#include "prefpower/margin_stats.hpp"
#include "prefpower/rng.hpp"
#include "prefpower/stats.hpp"

namespace {

using namespace prefpower;

void BM_ExactBinomialTest(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_binomial_test(n / 2 + n / 20, n));
  }
}
BENCHMARK(BM_ExactBinomialTest)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BinomialTestPlan(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) {
    BinomialTestPlan plan(n, 0.05);
    benchmark::DoNotOptimize(plan.rejects(n / 2));
  }
}
BENCHMARK(BM_BinomialTestPlan)->Arg(100)->Arg(1000)->Arg(2000);

void BM_DetectabilityPoint(benchmark::State& state) {
  PairAggregate agg;
  agg.pair = PairKey::of("left", "right");
  agg.wins_first = 4500;
  agg.wins_second = 5500;
  const std::vector<std::int64_t> grid = {state.range(0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(detectability_curve(agg, grid, {.trials = 500}, 7));
  }
}
BENCHMARK(BM_DetectabilityPoint)->Arg(100)->Arg(1000);

void BM_SimulateTwoStage(benchmark::State& state) {
  PromptTypeModel model;
  model.weights.assign(20, 0.05);
  model.deltas.assign(20, 0.0);
  model.deltas[7] = 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_power(model, AllocationPolicy::two_stage(50, 0.1), 2000, 0.05, 100, 3));
  }
}
BENCHMARK(BM_SimulateTwoStage);

void BM_BootstrapCi(benchmark::State& state) {
  std::vector<MarginEstimate> margins;
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    MarginEstimate m;
    m.pair = PairKey::of("m" + std::to_string(2 * i), "m" + std::to_string(2 * i + 1));
    m.delta_hat = 0.3 * rng.next_double();
    margins.push_back(m);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_quantile_ci(margins, 0.1, 1000, 0.95, 11));
  }
}
BENCHMARK(BM_BootstrapCi);

}  // namespace

BENCHMARK_MAIN();
