#include <benchmark/benchmark.h>

#include "fracjump/grid.hpp"
#include "fracjump/marcinkiewicz.hpp"

using namespace fracjump;

namespace {

void BM_WhitneyStats(benchmark::State& state) {
  const Surface s(build_surface(1.3, 2.1, 12));
  WhitneyOptions opt;
  opt.k_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(whitney_stats(s, inner_region(s), opt));
}
BENCHMARK(BM_WhitneyStats)->DenseRange(5, 8)->Unit(benchmark::kMillisecond);

void BM_WhitneyPlain(benchmark::State& state) {
  const Surface s(build_surface(1.3, 2.1, 12));
  WhitneyOptions opt;
  opt.k_max = static_cast<int>(state.range(0));
  opt.planar_shortcut = false;
  for (auto _ : state) benchmark::DoNotOptimize(whitney_stats(s, inner_region(s), opt));
}
BENCHMARK(BM_WhitneyPlain)->DenseRange(5, 7)->Unit(benchmark::kMillisecond);

void BM_IntegralFromStats(benchmark::State& state) {
  const Surface s(unit_cube_spec());
  WhitneyOptions opt;
  opt.k_max = 12;
  const auto st = whitney_stats(s, inner_region(s), opt);
  for (auto _ : state) benchmark::DoNotOptimize(integral_Ip(st, 0.7));
}
BENCHMARK(BM_IntegralFromStats);

}  // namespace

BENCHMARK_MAIN();
