#include <benchmark/benchmark.h>

#include <random>

#include "cidal/swd.hpp"

namespace {

cidal::Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  cidal::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void BM_SlicedWasserstein(benchmark::State& state) {
  const auto m = state.range(0);
  const auto l = static_cast<int>(state.range(1));
  const cidal::Matrix x = gaussian(m, 8, 1), y = gaussian(m, 8, 2);
  const auto proj = cidal::sample_projections(8, l, 3);
  for (auto _ : state) benchmark::DoNotOptimize(cidal::sliced_wasserstein_sq(x, y, proj));
  state.SetItemsProcessed(state.iterations() * m * l);
}
BENCHMARK(BM_SlicedWasserstein)->Args({32, 64})->Args({256, 64})->Args({256, 256});

void BM_SlicedWassersteinGrad(benchmark::State& state) {
  const auto m = state.range(0);
  const cidal::Matrix x = gaussian(m, 8, 1), y = gaussian(m, 8, 2);
  const auto proj = cidal::sample_projections(8, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(cidal::sliced_wasserstein_value_grad(x, y, proj));
}
BENCHMARK(BM_SlicedWassersteinGrad)->Arg(32)->Arg(256);

}  // namespace
