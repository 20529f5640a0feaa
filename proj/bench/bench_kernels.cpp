// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "advdens/divergences.hpp"
#include "advdens/flow.hpp"
#include "advdens/fourier.hpp"

namespace {

using namespace advdens;

const SampleSet& bench_samples() {
  static const SampleSet s = uniform_samples(2, 1 << 16, 11);
  return s;
}

void BM_coefficients_serial(benchmark::State& state) {
  const int cutoff = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::accumulate_coefficients(bench_samples(), cutoff));
}

void BM_coefficients_parallel(benchmark::State& state) {
  const int cutoff = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::accumulate_coefficients(bench_samples(), cutoff));
}

const FourierDensity& bench_density(int which) {
  static const FourierDensity a = smooth_test_density(2, 2.0, 4);
  static const FourierDensity b = FourierDensity::uniform(2);
  return which == 0 ? a : b;
}

void BM_divergences_serial(benchmark::State& state) {
  const GridSpec grid{Box::unit(2), static_cast<int>(state.range(0))};
  DensityFn p = [](std::span<const double> x) { return bench_density(0)(x); };
  DensityFn q = [](std::span<const double> x) { return bench_density(1)(x); };
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::grid_divergences(p, q, grid, false));
}

void BM_divergences_parallel(benchmark::State& state) {
  const GridSpec grid{Box::unit(2), static_cast<int>(state.range(0))};
  DensityFn p = [](std::span<const double> x) { return bench_density(0)(x); };
  DensityFn q = [](std::span<const double> x) { return bench_density(1)(x); };
  for (auto _ : state) benchmark::DoNotOptimize(grid_divergences(p, q, grid, false));
}

struct BankFixture {
  DiscriminatorBank bank;
  PointMatrix points;
  double clamp;
  BankFixture() {
    Philox rng(5);
    std::vector<MlpGenerator> gens;
    for (int i = 0; i < 6; ++i) gens.push_back(MlpGenerator::random(2, 3, 0.5, rng));
    bank = DiscriminatorBank::pairwise(gens);
    points = gens[0].forward(uniform_latent(2, 1 << 16, rng));
    clamp = default_clamp(gens);
  }
};

const BankFixture& bank_fixture() {
  static const BankFixture f;
  return f;
}

void BM_bank_serial(benchmark::State& state) {
  const auto& f = bank_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::bank_moments(f.bank, f.points, f.clamp));
}

void BM_bank_parallel(benchmark::State& state) {
  const auto& f = bank_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::bank_moments(f.bank, f.points, f.clamp));
}

}  // namespace

BENCHMARK(BM_coefficients_serial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_coefficients_parallel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_divergences_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_divergences_parallel)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bank_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bank_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
