#pragma once

#include <cstdint>
#include <utility>

#include "ovb/learners.hpp"
#include "ovb/model.hpp"

namespace ovb {

// lambda_s -/+ |rho_Y| * C_Y * C_alpha * S_Y with S_Y = sqrt(sigma_Ys^2 * v_s^2).
std::pair<double, double> bias_bound_lambda(const ShortEstimates& est,
                                            const SensitivityConfig& cfg);

// gamma_s -/+ |rho_D| * C_D * C_alpha * S_D with S_D = sqrt(sigma_Ds^2 * v_s^2).
std::pair<double, double> bias_bound_gamma(const ShortEstimates& est,
                                           const SensitivityConfig& cfg);

// C_alpha implied by the share of weight variance the short model retains:
// sqrt((1 - r2) / r2).
double c_alpha_from_r2(double r2);

// Outcome of benchmarking one covariate group against the omitted variable.
// G quantities are estimable from data; the implied C values additionally use
// the researcher-chosen relative strengths k.
struct BenchmarkResult {
  std::string group;
  double g_alpha = 0.0, g_y = 0.0, g_d = 0.0;
  double c_alpha = 0.0, c_y = 0.0, c_d = 0.0;
  double r2_alpha_drop = 1.0, r2_y_drop = 1.0, r2_d_drop = 1.0;
  bool c_alpha_defined = true;
  std::string error;    // set when k_alpha * g_alpha >= 1
  std::string warning;  // set when a sampled G was floored at zero
};

// Runs two cross-fitted short estimations, with the full covariate set and
// with the group removed, sharing one fold plan, and converts the ratio of
// fits into implied sensitivity values at relative strengths (k_alpha, k_y,
// k_d).
BenchmarkResult benchmark_calibrate(const Dataset& data, Estimand estimand,
                                    const CovariateGroup& group, double k_alpha, double k_y,
                                    double k_d, const LearnerSpec& spec, int k_folds,
                                    std::uint64_t seed, int workers = 0);

// Largest implied value per parameter across groups, with the group that
// attains it.
struct BenchmarkMax {
  double c_alpha = 0.0, c_y = 0.0, c_d = 0.0;
  std::string group_alpha, group_y, group_d;
};
BenchmarkMax benchmark_max(const std::vector<BenchmarkResult>& results);

}  // namespace ovb
