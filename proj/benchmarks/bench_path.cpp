#include <benchmark/benchmark.h>

#include "sparsecert/greedy_path.hpp"
#include "sparsecert/optimality.hpp"
#include "sparsecert/synthetic.hpp"

using namespace sparsecert;

static void BM_GreedyApproxPath(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = synthetic::spiked_uniform(n, 2.0, 1);
  const CovarianceModel m = CovarianceModel::from_covariance(inst.sigma);
  for (auto _ : state) benchmark::DoNotOptimize(path_greedy_approx(m));
  state.SetComplexityN(n);
}
BENCHMARK(BM_GreedyApproxPath)->RangeMultiplier(2)->Range(50, 400)->Complexity(benchmark::oNCubed)
    ->Unit(benchmark::kMillisecond);

static void BM_GreedyFullPath(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = synthetic::spiked_uniform(n, 2.0, 1);
  const CovarianceModel m = CovarianceModel::from_covariance(inst.sigma);
  for (auto _ : state) benchmark::DoNotOptimize(path_greedy_full(m));
}
BENCHMARK(BM_GreedyFullPath)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_MinimizeGap(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = synthetic::spiked_uniform(n, 100.0, 1);
  const CovarianceModel m = CovarianceModel::from_covariance(inst.sigma);
  for (auto _ : state) benchmark::DoNotOptimize(minimize_gap(m.factor(), inst.support));
}
BENCHMARK(BM_MinimizeGap)->Arg(60)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
