#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "lsml/features.hpp"
#include "lsml/forest.hpp"
#include "lsml/grid.hpp"
#include "lsml/levelset.hpp"
#include "lsml/rng.hpp"
#include "lsml/synth.hpp"

namespace {

using namespace lsml;

Phantom phantom(int size) {
  PhantomParams p;
  p.dims = {size, size, size};
  p.radius_min = size / 7.0;
  p.radius_max = size / 3.5;
  p.seed = 11;
  return generate(p);
}

void BM_SignedDistance(benchmark::State& state) {
  const Phantom ph = phantom(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(signed_distance(ph.truth));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ph.truth.size()));
}
BENCHMARK(BM_SignedDistance)->Arg(41)->Arg(81)->Unit(benchmark::kMillisecond);

void BM_GaussianSmooth(benchmark::State& state) {
  const Phantom ph = phantom(41);
  const double sigma = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_smooth(ph.image, sigma));
}
BENCHMARK(BM_GaussianSmooth)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_AssembleBand(benchmark::State& state) {
  const Phantom ph = phantom(41);
  const ScalarField u = signed_distance(ph.truth);
  const ImageScales scales(ph.image, default_sigmas());
  const std::vector<Voxel> band = narrow_band(u, 3.0);
  const FeatureMap map = state.range(0) == 1 ? FeatureMap::fm1 : FeatureMap::fm2;
  for (auto _ : state) benchmark::DoNotOptimize(assemble(u, scales, map, band));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(band.size()));
  state.SetLabel(to_string(map));
}
BENCHMARK(BM_AssembleBand)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ForestFit(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  const std::size_t cols = 18;
  Rng rng(3);
  std::vector<double> x(rows * cols), y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) x[r * cols + c] = uniform01(rng);
    y[r] = std::sin(6.0 * x[r * cols]) + x[r * cols + 1] + 0.1 * standard_normal(rng);
  }
  ForestParams p;
  p.n_trees = 10;
  p.min_samples_leaf = 5;
  p.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(DataView{x, cols}, y, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_ForestFit)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
  const Phantom ph = phantom(41);
  const LevelSetState s0 = make_state(ph.truth, 3.0);
  const ScalarField v(ph.truth.dims(), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(step(s0, v, 3.0));
}
BENCHMARK(BM_Step)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
