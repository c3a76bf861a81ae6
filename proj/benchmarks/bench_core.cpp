#include <benchmark/benchmark.h>

#include "ellipstat/elliptical.hpp"
#include "ellipstat/estimators.hpp"
#include "ellipstat/location_tests.hpp"
#include "ellipstat/matrix_tests.hpp"
#include "ellipstat/sparse_opt.hpp"

namespace {

using namespace ellipstat;

DataMatrix bench_sample(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  EllipticalSpec spec =
      EllipticalSpec::student(4.0, Vector::Zero(p), Matrix::Identity(p, p));
  return sample_elliptical(spec, n, seed);
}

void BM_SpatialMedian(benchmark::State& state) {
  DataMatrix x = bench_sample(state.range(0), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(spatial_median(x));
}
BENCHMARK(BM_SpatialMedian)->Args({100, 50})->Args({500, 100});

void BM_ScaledSpatialMedian(benchmark::State& state) {
  DataMatrix x = bench_sample(state.range(0), state.range(1), 2);
  for (auto _ : state) benchmark::DoNotOptimize(scaled_spatial_median(x));
}
BENCHMARK(BM_ScaledSpatialMedian)->Args({60, 50})->Args({200, 100});

void BM_Sscm(benchmark::State& state) {
  DataMatrix x = bench_sample(state.range(0), state.range(1), 3);
  Vector center = Vector::Zero(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sscm(x, center));
}
BENCHMARK(BM_Sscm)->Args({500, 100})->Args({2000, 200});

void BM_KendallTau(benchmark::State& state) {
  DataMatrix x = bench_sample(state.range(0), state.range(1), 4);
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau_matrix(x));
}
BENCHMARK(BM_KendallTau)->Args({200, 50})->Args({500, 100});

void BM_Tyler(benchmark::State& state) {
  DataMatrix x = bench_sample(state.range(0), state.range(1), 5);
  Vector center = Vector::Zero(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(tyler(x, center));
}
BENCHMARK(BM_Tyler)->Args({200, 20})->Args({400, 50});

void BM_OneSampleSignTest(benchmark::State& state) {
  DataMatrix x = bench_sample(state.range(0), state.range(1), 6);
  Vector mu0 = Vector::Zero(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(one_sample_sign_test(x, mu0));
}
BENCHMARK(BM_OneSampleSignTest)->Args({60, 50})->Args({100, 200});

void BM_SphericitySign(benchmark::State& state) {
  DataMatrix x = bench_sample(state.range(0), state.range(1), 7);
  for (auto _ : state) benchmark::DoNotOptimize(sphericity_sign_test(x));
}
BENCHMARK(BM_SphericitySign)->Args({60, 40})->Args({200, 50});

void BM_SclimeColumn(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  DataMatrix x = bench_sample(400, p, 8);
  SpatialMedian med = spatial_median(x);
  Matrix g = static_cast<double>(p) * sscm(x, med.theta).matrix;
  DantzigSolver solver(g);
  Vector e0 = Vector::Unit(p, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(solver.solve(e0, 0.25, 1e-7, 20000));
}
BENCHMARK(BM_SclimeColumn)->Arg(50)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
