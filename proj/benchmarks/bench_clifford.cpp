#include <random>

#include <benchmark/benchmark.h>

#include "fracjump/clifford.hpp"

namespace {

fracjump::Multivector random_mv(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  fracjump::Multivector m(n);
  for (auto& c : m.coeffs()) c = g(rng);
  return m;
}

void BM_GeometricProduct(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const auto a = random_mv(n, rng), b = random_mv(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fracjump::geometric_product(a, b));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GeometricProduct)->DenseRange(1, 6);

void BM_FundamentalSolution(benchmark::State& state) {
  const fracjump::Paravector x{{0.3, -0.2, 0.7}};
  for (auto _ : state) benchmark::DoNotOptimize(fracjump::fundamental_solution(x));
}
BENCHMARK(BM_FundamentalSolution);

}  // namespace

BENCHMARK_MAIN();
