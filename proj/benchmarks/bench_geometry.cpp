#include <random>

#include <benchmark/benchmark.h>

#include "fracjump/grid.hpp"
#include "fracjump/surface.hpp"

using namespace fracjump;

namespace {

void BM_SurfaceDistance(benchmark::State& state) {
  const Surface s(build_surface(1.3, 2.1, static_cast<int>(state.range(0))));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.1, 1.1), v(-1.1, 0.1), w(-0.2, 0.6);
  std::vector<Point> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back(Point{u(rng), v(rng), w(rng)});
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.distance(pts[i++ & 1023]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SurfaceDistance)->Arg(4)->Arg(8)->Arg(12);

void BM_Contains(benchmark::State& state) {
  const Surface s(build_surface(1.3, 2.1, 12));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.1, 1.1), v(-1.1, 0.1), w(-0.2, 0.6);
  std::vector<Point> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back(Point{u(rng), v(rng), w(rng)});
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.contains(pts[i++ & 1023]));
}
BENCHMARK(BM_Contains);

void BM_BoxCount(benchmark::State& state) {
  const Surface s(build_surface(1.3, 2.1, 12));
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(box_count(s, k));
}
BENCHMARK(BM_BoxCount)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
