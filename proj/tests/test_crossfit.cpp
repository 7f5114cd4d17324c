#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "ovb/crossfit.hpp"
#include "ovb/rng.hpp"
#include "ovb/simdgp.hpp"

using namespace ovb;

namespace {

LearnerSpec cells_learner() {
  LearnerSpec spec;
  spec.kind = LearnerKind::SaturatedCells;
  return spec;
}

double omega_operator_norm(const Mat5& m) {
  Eigen::Matrix<double, 5, 5> e;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) e(i, j) = m(i, j);
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>>(e)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

}  // namespace

TEST_CASE("fold assignment sizes and determinism") {
  SUBCASE("even split") {
    const FoldPlan plan = assign_folds(100, 5, 1);
    std::vector<int> counts(5, 0);
    for (int f : plan.assignments) counts[static_cast<std::size_t>(f)]++;
    for (int c : counts) CHECK(c == 20);
  }
  SUBCASE("remainder spread") {
    const FoldPlan plan = assign_folds(101, 5, 1);
    std::vector<int> counts(5, 0);
    for (int f : plan.assignments) counts[static_cast<std::size_t>(f)]++;
    std::sort(counts.begin(), counts.end());
    CHECK(counts == std::vector<int>{20, 20, 20, 20, 21});
  }
  SUBCASE("same seed, same plan") {
    CHECK(assign_folds(73, 4, 99).assignments == assign_folds(73, 4, 99).assignments);
    CHECK(assign_folds(73, 4, 99).assignments != assign_folds(73, 4, 100).assignments);
  }
  SUBCASE("bounds on K") {
    CHECK_THROWS_AS(assign_folds(10, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(assign_folds(10, 6, 0), std::invalid_argument);
  }
}

TEST_CASE("cross-fitted estimates match independent cell arithmetic exactly") {
  // The saturated learner reduces the whole pipeline to complement cell
  // means; recompute those by hand for every K and compare the pooled means.
  const auto spec = sim::default_spec(Estimand::LATE, 600, 31);
  const auto gen = sim::generate(spec);
  for (int k_folds : {2, 3, 5}) {
    const FoldPlan plan = assign_folds(gen.data.n(), k_folds, 7700 + static_cast<std::uint64_t>(k_folds));
    const CrossfitResult fit = crossfit_estimate(gen.data, Estimand::LATE, cells_learner(), plan);
    const double oracle_lambda =
        ovbtest::crossfit_aipw_cells(gen.data.y, gen.data.z, gen.data.x, plan.assignments);
    const double oracle_gamma =
        ovbtest::crossfit_aipw_cells(gen.data.d, gen.data.z, gen.data.x, plan.assignments);
    CHECK(std::abs(fit.est.lambda_s - oracle_lambda) < 1e-12);
    CHECK(std::abs(fit.est.gamma_s - oracle_gamma) < 1e-12);
  }
}

TEST_CASE("cell-deterministic outcomes reproduce the full-sample plug-in for any folds") {
  // When y and d are exact functions of (z, x), complement cell means equal
  // the full-sample ones and the pooled estimate is the plug-in contrast.
  sim::DgpSpec spec = sim::default_spec(Estimand::LATE, 500, 8);
  spec.na = 1;
  spec.pa.assign(static_cast<std::size_t>(spec.nx), 1.0);
  spec.pi = {0.5, 0.55, 0.6};
  spec.type_probs.assign(3, {0.0, 0.0, 1.0});  // everyone complies: d = z
  spec.mu = {{0, 0, 0, 0, 1.0, 3.0}, {0, 0, 0, 0, 2.0, 2.5}, {0, 0, 0, 0, -1.0, 4.0}};
  spec.noise_scale = 0.0;
  const auto gen = sim::generate(spec);
  const double plug_l = ovbtest::plugin_contrast(gen.data.y, gen.data.z, gen.data.x);
  const double plug_g = ovbtest::plugin_contrast(gen.data.d, gen.data.z, gen.data.x);
  for (int k_folds : {2, 4}) {
    const CrossfitResult fit =
        crossfit_estimate(gen.data, Estimand::LATE, cells_learner(), k_folds, 12345);
    CHECK(std::abs(fit.est.lambda_s - plug_l) < 1e-12);
    CHECK(std::abs(fit.est.gamma_s - plug_g) < 1e-12);
  }
}

TEST_CASE("proportional fold arms also reproduce the full-sample plug-in exactly") {
  // Noise is fine as long as every (x, z) cell is split across folds in
  // exact proportion.
  Rng rng(17);
  const int k_folds = 3;
  Dataset data;
  const int per_cell = 6;  // per (x, z) cell and fold
  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      for (int rep = 0; rep < per_cell * k_folds; ++rep) {
        data.y.push_back(rng.normal() + x + 2.0 * z);
        data.d.push_back(rng.bernoulli(0.3 + 0.4 * z) ? 1.0 : 0.0);
        data.z.push_back(z);
      }
    }
  }
  const std::size_t n = data.y.size();
  data.x = Matrix(n, 1);
  data.names = {"x1"};
  FoldPlan plan;
  plan.k_folds = k_folds;
  plan.assignments.resize(n);
  std::size_t pos = 0;
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 2; ++z)
      for (int rep = 0; rep < per_cell * k_folds; ++rep) {
        data.x(pos, 0) = x;
        plan.assignments[pos] = rep % k_folds;
        ++pos;
      }

  const CrossfitResult fit = crossfit_estimate(data, Estimand::LATE, cells_learner(), plan);
  const double plug = ovbtest::plugin_contrast(data.y, data.z, data.x);
  CHECK(std::abs(fit.est.lambda_s - plug) < 1e-12);
}

TEST_CASE("constant outcome gives zero lambda and zero outcome residual variance") {
  sim::DgpSpec spec = sim::default_spec(Estimand::LATE, 400, 5);
  spec.noise_scale = 0.0;
  for (auto& m : spec.mu) m = {7.0, 7.0, 7.0, 7.0, 7.0, 7.0};
  const auto gen = sim::generate(spec);
  const CrossfitResult fit = crossfit_estimate(gen.data, Estimand::LATE, cells_learner(), 4, 3);
  CHECK(std::abs(fit.est.lambda_s) < 1e-12);
  CHECK(fit.est.sigma_ys2 == doctest::Approx(0.0));
  CHECK(fit.est.gamma_s > 0.1);  // compliance still present
}

TEST_CASE("one-armed training folds abort with a clear message") {
  Dataset data;
  const std::size_t n = 40;
  data.x = Matrix(n, 1);
  data.names = {"x1"};
  for (std::size_t i = 0; i < n; ++i) {
    data.z.push_back(i < 2 ? 1.0 : 0.0);  // both treated rows land in fold 0
    data.d.push_back(data.z[i]);
    data.y.push_back(static_cast<double>(i));
  }
  FoldPlan plan;
  plan.k_folds = 4;
  plan.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) plan.assignments[i] = static_cast<int>(i % 4);
  plan.assignments[1] = 0;  // both treated rows in fold 0
  CHECK_THROWS_WITH_AS(crossfit_estimate(data, Estimand::LATE, cells_learner(), plan),
                       doctest::Contains("has no z=1"), std::runtime_error);

  // A single treated row in the complement is also unusable.
  data.z.assign(n, 0.0);
  data.z[0] = 1.0;
  data.z[20] = 1.0;
  CHECK_THROWS_WITH_AS(crossfit_estimate(data, Estimand::LATE, cells_learner(), 4, 11),
                       doctest::Contains("z=1"), std::runtime_error);
}

TEST_CASE("DML2 pooled estimate equals the mean of fold means on equal folds") {
  const auto spec = sim::default_spec(Estimand::LATE, 600, 99);
  const auto gen = sim::generate(spec);
  const CrossfitResult fit = crossfit_estimate(gen.data, Estimand::LATE, cells_learner(), 3, 4);
  double mean_fold = 0.0;
  for (double f : fit.fold_lambda) mean_fold += f;
  mean_fold /= static_cast<double>(fit.fold_lambda.size());
  CHECK(fit.est.lambda_s == doctest::Approx(mean_fold).epsilon(1e-12));

  // DML1 diagnostic is close to DML2 on a strong first stage.
  REQUIRE(fit.theta_dml1_defined);
  CHECK(std::abs(fit.theta_dml1 - fit.est.theta_s()) < 0.5);
}

TEST_CASE("covariance estimate is symmetric PSD and tracks the sampling variance") {
  const auto spec = sim::default_spec(Estimand::LATE, 2000, 2024);
  const int reps = 200;
  std::vector<double> lambdas(reps);
  double mean_omega11 = 0.0;
  for (int r = 0; r < reps; ++r) {
    sim::DgpSpec rep = spec;
    rep.seed = derive_seed(1, static_cast<std::uint64_t>(r));
    const auto gen = sim::generate(rep);
    const CrossfitResult fit = crossfit_estimate(gen.data, Estimand::LATE, cells_learner(), 5,
                                                 derive_seed(2, static_cast<std::uint64_t>(r)));
    lambdas[static_cast<std::size_t>(r)] = fit.est.lambda_s;
    mean_omega11 += fit.est.omega(0, 0) / static_cast<double>(fit.est.n);

    if (r == 0) {
      // Symmetry and PSD within tolerance of the trace.
      double trace = 0.0;
      for (int i = 0; i < 5; ++i) trace += fit.est.omega(i, i);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
          CHECK(std::abs(fit.est.omega(i, j) - fit.est.omega(j, i)) <= 1e-8 * trace);
      Eigen::Matrix<double, 5, 5> e;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) e(i, j) = fit.est.omega(i, j);
      const double min_eig =
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>>(e).eigenvalues().minCoeff();
      CHECK(min_eig > -1e-8 * trace);
    }
  }
  mean_omega11 /= reps;
  double m = 0.0, v = 0.0;
  for (double l : lambdas) m += l;
  m /= reps;
  for (double l : lambdas) v += (l - m) * (l - m);
  v /= reps - 1;
  CHECK(std::abs(mean_omega11 - v) / v < 0.25);
}

TEST_CASE("PLIVM crossfit recovers the structural slope") {
  const auto spec = sim::default_spec(Estimand::PLIVM, 4000, 66);
  const auto truth = sim::oracle_truth(spec);
  const auto gen = sim::generate(spec);
  const CrossfitResult fit = crossfit_estimate(gen.data, Estimand::PLIVM, cells_learner(), 5, 8);
  CHECK(std::abs(fit.est.lambda_s - truth.lambda_s) < 0.15);
  CHECK(std::abs(fit.est.gamma_s - truth.gamma_s) < 0.1);
  CHECK(std::abs(fit.est.v_s2 - truth.v_s2) < 0.1);
  CHECK(std::abs(fit.est.sigma_ys2 - truth.sigma_ys2) < 0.4);
}

TEST_CASE("median aggregation") {
  const auto spec = sim::default_spec(Estimand::LATE, 400, 15);
  const auto gen = sim::generate(spec);
  std::vector<CrossfitResult> runs;
  for (int l = 0; l < 3; ++l)
    runs.push_back(crossfit_estimate(gen.data, Estimand::LATE, cells_learner(), 4,
                                     derive_seed(5, static_cast<std::uint64_t>(l))));

  SUBCASE("singleton passes through unchanged") {
    const CrossfitResult one = median_aggregate({runs[0]});
    CHECK(one.est.lambda_s == runs[0].est.lambda_s);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(one.est.omega(i, j) == runs[0].est.omega(i, j));
  }
  SUBCASE("coordinatewise median of the parameters") {
    std::vector<CrossfitResult> tweaked = runs;
    tweaked[0].est.lambda_s = 1.0;
    tweaked[1].est.lambda_s = 2.0;
    tweaked[2].est.lambda_s = 9.0;
    const CrossfitResult med = median_aggregate(tweaked);
    CHECK(med.est.lambda_s == 2.0);
  }
  SUBCASE("permutation invariance") {
    std::vector<CrossfitResult> shuffled = {runs[2], runs[0], runs[1]};
    const CrossfitResult a = median_aggregate(runs);
    const CrossfitResult b = median_aggregate(shuffled);
    CHECK(a.est.lambda_s == b.est.lambda_s);
    CHECK(a.est.gamma_s == b.est.gamma_s);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(a.est.omega(i, j) == b.est.omega(i, j));
  }
  SUBCASE("even-count covariance pick includes the outer-product inflation") {
    // Equal input covariances, parameter vectors on opposite sides of the
    // coordinatewise median: both adjusted matrices carry a rank-one
    // dispersion term, so the chosen one dominates the raw input.
    std::vector<CrossfitResult> two = {runs[0], runs[0]};
    two[0].est.lambda_s = 1.0;
    two[0].est.gamma_s = 0.9;
    two[1].est.lambda_s = 3.0;
    two[1].est.gamma_s = 0.2;
    const Mat5 sigma = runs[0].est.omega;
    const CrossfitResult med = median_aggregate(two);
    CHECK(med.est.lambda_s == 1.0);
    CHECK(med.est.gamma_s == 0.2);
    CHECK(omega_operator_norm(med.est.omega) >= omega_operator_norm(sigma) - 1e-12);
    // The dispersion lands in the lambda slot (+4) or the gamma slot (+0.49).
    const double added =
        (med.est.omega(0, 0) - sigma(0, 0)) + (med.est.omega(1, 1) - sigma(1, 1));
    CHECK(added >= 0.49 - 1e-9);
  }
  CHECK_THROWS_AS(median_aggregate({}), std::invalid_argument);
}

TEST_CASE("median crossfit is deterministic") {
  const auto spec = sim::default_spec(Estimand::LATE, 400, 3);
  const auto gen = sim::generate(spec);
  const CrossfitResult a = median_crossfit(gen.data, Estimand::LATE, cells_learner(), 4, 3, 10, 2);
  const CrossfitResult b = median_crossfit(gen.data, Estimand::LATE, cells_learner(), 4, 3, 10, 1);
  CHECK(a.est.lambda_s == b.est.lambda_s);
  CHECK(a.est.omega(0, 0) == b.est.omega(0, 0));
}
