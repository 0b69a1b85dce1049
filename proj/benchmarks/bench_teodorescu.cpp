#include <benchmark/benchmark.h>

#include "fracjump/analysis.hpp"
#include "fracjump/cell_integral.hpp"

using namespace fracjump;

namespace {

void BM_BoxKernelExact(benchmark::State& state) {
  const Box b(Point{0.0, 0.0, 0.0}, Point{0.25, 0.25, 0.25});
  const Point x{0.1, 0.3, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(box_kernel_integral_3d(b, x));
}
BENCHMARK(BM_BoxKernelExact);

void BM_BoxKernelGauss(benchmark::State& state) {
  const Box b(Point{0.0, 0.0, 0.0}, Point{0.25, 0.25, 0.25});
  const Point x{0.1, 0.9, 0.2};
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(box_kernel_gauss(b, x, order));
}
BENCHMARK(BM_BoxKernelGauss)->DenseRange(1, 3);

void BM_TeodorescuEvaluate(benchmark::State& state) {
  const auto s = make_surface(unit_cube_spec());
  const auto dec = whitney_decompose(s, inner_region(*s), static_cast<int>(state.range(0)));
  const auto u = closed_form_field(2, [](const Point& y) { return Multivector::scalar(2, y[0] * y[1] + y[2]); });
  const TeodorescuOperator t(dec, u, {});
  const Point x{0.37, 0.52, 0.61};
  for (auto _ : state) benchmark::DoNotOptimize(t(x));
  state.counters["cells"] = static_cast<double>(t.base_cells());
}
BENCHMARK(BM_TeodorescuEvaluate)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
