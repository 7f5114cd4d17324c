#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ovb/learners.hpp"
#include "ovb/rng.hpp"

using namespace ovb;

namespace {

Matrix column(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

}  // namespace

TEST_CASE("saturated cells compute per-cell means") {
  const Matrix x = column({0, 0, 1});
  LearnerSpec spec;
  spec.kind = LearnerKind::SaturatedCells;
  const auto fit = fit_learner(spec, x, {1.0, 3.0, 5.0}, TargetKind::Mean);
  const auto pred = fit.predict(column({0, 1}));
  CHECK(pred[0] == doctest::Approx(2.0));
  CHECK(pred[1] == doctest::Approx(5.0));
}

TEST_CASE("saturated cells report the missing cell by value") {
  const Matrix x = column({0, 0, 1});
  LearnerSpec spec;
  spec.kind = LearnerKind::SaturatedCells;
  const auto fit = fit_learner(spec, x, {1.0, 3.0, 5.0}, TargetKind::Mean);
  CHECK_THROWS_WITH_AS(fit.predict(column({2})), doctest::Contains("(2)"), std::runtime_error);
}

TEST_CASE("saturated cells reject continuous features") {
  const Matrix x = column({0.25, 1.0});
  LearnerSpec spec;
  spec.kind = LearnerKind::SaturatedCells;
  CHECK_THROWS_AS(fit_learner(spec, x, {1.0, 2.0}, TargetKind::Mean), std::runtime_error);
}

TEST_CASE("ridge with zero penalty solves a noiseless line") {
  Matrix x(6, 1);
  std::vector<double> y(6);
  for (int i = 0; i < 6; ++i) {
    x(static_cast<std::size_t>(i), 0) = i;
    y[static_cast<std::size_t>(i)] = 2.0 * i;
  }
  LearnerSpec spec;
  spec.kind = LearnerKind::Ridge;
  spec.ridge_penalty = 0.0;
  const auto fit = fit_learner(spec, x, y, TargetKind::Mean);
  const auto pred = fit.predict(column({10.0}));
  CHECK(std::abs(pred[0] - 20.0) < 1e-10);
}

TEST_CASE("ridge flags a singular unpenalized system") {
  Matrix x(4, 2);
  for (int i = 0; i < 4; ++i) {
    x(static_cast<std::size_t>(i), 0) = i;
    x(static_cast<std::size_t>(i), 1) = 2.0 * i;  // collinear
  }
  LearnerSpec spec;
  spec.kind = LearnerKind::Ridge;
  spec.ridge_penalty = 0.0;
  CHECK_THROWS_WITH_AS(fit_learner(spec, x, {0, 1, 2, 3}, TargetKind::Mean),
                       doctest::Contains("singular"), std::runtime_error);
  spec.ridge_penalty = 1e-3;  // regularized system is fine
  CHECK_NOTHROW(fit_learner(spec, x, {0, 1, 2, 3}, TargetKind::Mean));
}

TEST_CASE("forest beats the trivial predictor on a smooth signal") {
  Rng rng(11);
  const std::size_t n = 600, n_hold = 200;
  Matrix x(n, 2), xh(n_hold, 2);
  std::vector<double> y(n), yh(n_hold);
  auto f = [](double a, double b) { return std::sin(3.0 * a) + 0.5 * b * b; };
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform() * 2 - 1;
    x(i, 1) = rng.uniform() * 2 - 1;
    y[i] = f(x(i, 0), x(i, 1)) + 0.1 * rng.normal();
  }
  for (std::size_t i = 0; i < n_hold; ++i) {
    xh(i, 0) = rng.uniform() * 2 - 1;
    xh(i, 1) = rng.uniform() * 2 - 1;
    yh[i] = f(xh(i, 0), xh(i, 1)) + 0.1 * rng.normal();
  }
  LearnerSpec spec;
  spec.trees = 200;
  spec.seed = 5;
  const auto fit = fit_learner(spec, x, y, TargetKind::Mean);
  const auto pred = fit.predict(xh);

  double mean_h = 0.0;
  for (double v : yh) mean_h += v;
  mean_h /= static_cast<double>(n_hold);
  double mse = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n_hold; ++i) {
    mse += (pred[i] - yh[i]) * (pred[i] - yh[i]);
    var += (yh[i] - mean_h) * (yh[i] - mean_h);
  }
  CHECK(mse < var);  // holdout MSE below Var(y)
}

TEST_CASE("forest predictions are deterministic given the seed") {
  Rng rng(3);
  Matrix x(80, 3);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.normal();
    y[i] = x(i, 0) - x(i, 2) + 0.2 * rng.normal();
  }
  LearnerSpec spec;
  spec.trees = 40;
  spec.seed = 123;
  const auto a = fit_learner(spec, x, y, TargetKind::Mean, 4).predict(x);
  const auto b = fit_learner(spec, x, y, TargetKind::Mean, 1).predict(x);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);  // bitwise, any worker count
}

TEST_CASE("probability predictions are clipped") {
  const Matrix x = column({0, 0, 0, 0, 1, 1, 1, 1});
  const std::vector<double> z = {0, 0, 0, 0, 1, 1, 1, 1};
  LearnerSpec spec;
  spec.kind = LearnerKind::SaturatedCells;
  const auto fit = fit_learner(spec, x, z, TargetKind::Probability);
  const auto pred = fit.predict(column({0, 1}));
  CHECK(pred[0] == doctest::Approx(kProbabilityClip));        // raw 0.0
  CHECK(pred[1] == doctest::Approx(1.0 - kProbabilityClip));  // raw 1.0
}

TEST_CASE("single unpruned tree without bootstrap interpolates the sample") {
  Rng rng(9);
  Matrix x(40, 1);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = static_cast<double>(i);  // distinct feature values
    y[i] = rng.normal();
  }
  LearnerSpec spec;
  spec.trees = 1;
  spec.min_leaf = 1;
  spec.max_depth = 0;
  spec.mtry = 1;
  spec.bootstrap = false;
  const auto fit = fit_learner(spec, x, y, TargetKind::Mean);
  const auto pred = fit.predict(x);
  for (std::size_t i = 0; i < 40; ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("predict rejects a width mismatch") {
  const Matrix x = column({0, 1, 0, 1});
  LearnerSpec spec;
  spec.kind = LearnerKind::SaturatedCells;
  const auto fit = fit_learner(spec, x, {1, 2, 3, 4}, TargetKind::Mean);
  Matrix wide(1, 2);
  CHECK_THROWS_AS(fit.predict(wide), std::invalid_argument);
}

TEST_CASE("fit validates inputs") {
  const Matrix x = column({0, 1});
  LearnerSpec spec;
  CHECK_THROWS_AS(fit_learner(spec, x, {1.0}, TargetKind::Mean), std::invalid_argument);
  CHECK_THROWS_AS(fit_learner(spec, x, {0.5, 0.5}, TargetKind::Probability),
                  std::invalid_argument);
}

TEST_CASE("learner spec round-trips through the config text form") {
  LearnerSpec spec;
  spec.kind = LearnerKind::Ridge;
  spec.trees = 77;
  spec.min_leaf = 9;
  spec.max_depth = 4;
  spec.mtry = 2;
  spec.bootstrap = false;
  spec.ridge_penalty = 0.125;
  spec.seed = 42;
  LearnerSpec back;
  std::istringstream in(learner_spec_to_text(spec));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    apply_learner_key(back, line.substr(0, eq), line.substr(eq + 1));
  }
  CHECK(back.kind == spec.kind);
  CHECK(back.trees == spec.trees);
  CHECK(back.min_leaf == spec.min_leaf);
  CHECK(back.max_depth == spec.max_depth);
  CHECK(back.mtry == spec.mtry);
  CHECK(back.bootstrap == spec.bootstrap);
  CHECK(back.ridge_penalty == spec.ridge_penalty);
  CHECK(back.seed == spec.seed);
}
