#include <benchmark/benchmark.h>

#include "ovb/crossfit.hpp"
#include "ovb/identify.hpp"
#include "ovb/inference.hpp"
#include "ovb/learners.hpp"
#include "ovb/rng.hpp"
#include "ovb/simdgp.hpp"

using namespace ovb;

static void BM_ThetaBounds(benchmark::State& state) {
  double llo = 196.40, lhi = 1849.64, glo = 0.61, ghi = 0.62;
  for (auto _ : state) {
    benchmark::DoNotOptimize(theta_bounds(llo, lhi, glo, ghi));
  }
}
BENCHMARK(BM_ThetaBounds);

static void BM_NormalQuantile(benchmark::State& state) {
  double p = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_quantile(p));
    p += 1e-6;
    if (p > 0.999) p = 0.001;
  }
}
BENCHMARK(BM_NormalQuantile);

static void BM_ConstraintProb(benchmark::State& state) {
  const double rho = static_cast<double>(state.range(0)) / 100.0;
  double zl = 1.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stoye_constraint_prob(zl, 1.8, rho));
  }
}
BENCHMARK(BM_ConstraintProb)->Arg(0)->Arg(60)->Arg(95);

static void BM_StoyeSolve(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(stoye_ci(0.0, 1.0, 0.05, 0.06, 0.95, 2000, 0.05));
  }
}
BENCHMARK(BM_StoyeSolve)->Unit(benchmark::kMillisecond);

static void BM_ThetaInversion(benchmark::State& state) {
  const auto spec = sim::default_spec(Estimand::LATE, 2000, 5);
  const auto gen = sim::generate(spec);
  LearnerSpec cells;
  cells.kind = LearnerKind::SaturatedCells;
  const ShortEstimates est = crossfit_estimate(gen.data, Estimand::LATE, cells, 5, 2).est;
  const SensitivityConfig cfg = sim::oracle_truth(spec).config();
  const TRange range = default_t_range(est, cfg, 0.025);
  for (auto _ : state) {
    benchmark::DoNotOptimize(invert_theta_ci(est, cfg, 0.025, range, 2001));
  }
}
BENCHMARK(BM_ThetaInversion)->Unit(benchmark::kMillisecond);

static void BM_CrossfitCells(benchmark::State& state) {
  const auto spec = sim::default_spec(Estimand::LATE, static_cast<std::size_t>(state.range(0)), 5);
  const auto gen = sim::generate(spec);
  LearnerSpec cells;
  cells.kind = LearnerKind::SaturatedCells;
  for (auto _ : state) {
    benchmark::DoNotOptimize(crossfit_estimate(gen.data, Estimand::LATE, cells, 5, 17));
  }
}
BENCHMARK(BM_CrossfitCells)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_ForestFit(benchmark::State& state) {
  Rng rng(7);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix x(n, 6);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = rng.normal();
    y[i] = x(i, 0) - 0.5 * x(i, 3) + rng.normal();
  }
  LearnerSpec spec;
  spec.trees = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_learner(spec, x, y, TargetKind::Mean, 0));
  }
}
BENCHMARK(BM_ForestFit)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
