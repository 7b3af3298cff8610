// Serial reference vs OpenMP-parallel sweeps: grid maximum, Monte-Carlo average and exact
// per-cell volumes. Arguments: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "relax/analysis.hpp"
#include "relax/verify.hpp"

using namespace relax;

namespace {

RelaxationConfig cfg_of(Method m, int L) {
  RelaxationConfig cfg;
  cfg.method = m;
  cfg.L = L;
  return cfg;
}

Exec exec_of(const benchmark::State& state) { return {state.range(0) != 0, 0}; }

void BM_EmpiricalMax(benchmark::State& state) {
  const RelaxationConfig cfg = cfg_of(Method::HybS, 3);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_max_error(cfg, false, 513, exec_of(state)).max);
  state.SetItemsProcessed(state.iterations() * 513 * 513);
}

void BM_MonteCarlo(benchmark::State& state) {
  const RelaxationConfig cfg = cfg_of(Method::DNMDT, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(monte_carlo_avg_error(cfg, false, 1 << 18, 7, {true}, exec_of(state)).mean);
  state.SetItemsProcessed(state.iterations() * (1 << 18));
}

void BM_CellVolumes(benchmark::State& state) {
  const RelaxationConfig cfg = cfg_of(Method::Bin2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(cell_volumes(cfg, 3, exec_of(state)).size());
}

void BM_Sharpness(benchmark::State& state) {
  RelaxationConfig cfg = cfg_of(Method::HybS, 2);
  cfg.L1 = 2;
  const auto grid = unit_grid(Rational(1, 32));
  for (auto _ : state) benchmark::DoNotOptimize(check_sharpness(cfg, grid, exec_of(state)).sharp);
}

}  // namespace

BENCHMARK(BM_EmpiricalMax)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CellVolumes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sharpness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
