#include "ovb/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ovb/crossfit.hpp"

namespace ovb {

std::pair<double, double> bias_bound_lambda(const ShortEstimates& est,
                                            const SensitivityConfig& cfg) {
  const double s_y = std::sqrt(std::max(0.0, est.sigma_ys2 * est.v_s2));
  const double half = cfg.zeta_y() * s_y;
  return {est.lambda_s - half, est.lambda_s + half};
}

std::pair<double, double> bias_bound_gamma(const ShortEstimates& est,
                                           const SensitivityConfig& cfg) {
  const double s_d = std::sqrt(std::max(0.0, est.sigma_ds2 * est.v_s2));
  const double half = cfg.zeta_d() * s_d;
  return {est.gamma_s - half, est.gamma_s + half};
}

double c_alpha_from_r2(double r2) {
  if (!(r2 > 0.0) || r2 > 1.0)
    throw std::invalid_argument("c_alpha_from_r2: r2 must lie in (0, 1], got " +
                                format_double(r2));
  return std::sqrt((1.0 - r2) / r2);
}

namespace {

// Ratio clamped into (0, 1]: sampling noise can push the retained share of
// explanatory power slightly above one; the population value cannot exceed it.
double clamp_r2(double value, std::string& warning, const char* label) {
  if (value > 1.0) {
    if (warning.empty())
      warning = std::string("estimated R2 for ") + label + " exceeded 1 and was floored (G=0)";
    return 1.0;
  }
  return value;
}

}  // namespace

BenchmarkResult benchmark_calibrate(const Dataset& data, Estimand estimand,
                                    const CovariateGroup& group, double k_alpha, double k_y,
                                    double k_d, const LearnerSpec& spec, int k_folds,
                                    std::uint64_t seed, int workers) {
  if (group.columns.empty()) throw std::invalid_argument("benchmark: group is empty");
  if (!(k_alpha >= 0.0 && k_y >= 0.0 && k_d >= 0.0))
    throw std::invalid_argument("benchmark: relative strengths k must be >= 0");

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < data.names.size(); ++j) {
    if (std::find(group.columns.begin(), group.columns.end(), data.names[j]) ==
        group.columns.end())
      keep.push_back(j);
  }
  for (const auto& col : group.columns)
    if (!data.column_index(col))
      throw std::invalid_argument("benchmark: group column '" + col + "' not in dataset");
  if (keep.size() == data.names.size())
    throw std::invalid_argument("benchmark: group '" + group.name +
                                "' matches no covariate columns");
  if (keep.empty())
    throw std::invalid_argument("benchmark: removing group '" + group.name +
                                "' leaves zero covariates");

  Dataset reduced = data;
  reduced.x = data.x.select_cols(keep);
  reduced.names.clear();
  for (std::size_t j : keep) reduced.names.push_back(data.names[j]);

  // One fold plan for both fits so the ratios are not polluted by fold noise.
  const FoldPlan plan = assign_folds(data.n(), k_folds, seed);
  const CrossfitResult full = crossfit_estimate(data, estimand, spec, plan, workers);
  const CrossfitResult drop = crossfit_estimate(reduced, estimand, spec, plan, workers);

  BenchmarkResult out;
  out.group = group.name;

  // Share of weight second moment retained after dropping the group. For
  // LATE/LATT this is E[alpha_{s,-j}^2]/E[alpha_s^2]; for PLIVM the
  // instrument-residual MSE ratio MSE_full/MSE_drop reduces to the same
  // expression because v_s^2 = 1/E[(Z-l)^2].
  double r2_alpha = full.est.v_s2 > 0.0 ? drop.est.v_s2 / full.est.v_s2 : 1.0;
  r2_alpha = clamp_r2(r2_alpha, out.warning, "alpha");
  out.r2_alpha_drop = r2_alpha;
  out.g_alpha = (1.0 - r2_alpha) / r2_alpha;

  const double kg = k_alpha * out.g_alpha;
  if (kg >= 1.0) {
    out.c_alpha_defined = false;
    out.error = "k_alpha * G_alpha = " + format_double(kg) + " >= 1; C_alpha undefined";
  } else {
    out.c_alpha = std::sqrt(kg / (1.0 - kg));
  }

  // Outcome equation: retained share is MSE_full / MSE_drop.
  double r2_y = drop.est.sigma_ys2 > 0.0 ? full.est.sigma_ys2 / drop.est.sigma_ys2 : 1.0;
  r2_y = clamp_r2(r2_y, out.warning, "y");
  out.r2_y_drop = r2_y;
  out.g_y = (1.0 - r2_y) / r2_y;
  out.c_y = std::sqrt(k_y * out.g_y);

  double r2_d = drop.est.sigma_ds2 > 0.0 ? full.est.sigma_ds2 / drop.est.sigma_ds2 : 1.0;
  r2_d = clamp_r2(r2_d, out.warning, "d");
  out.r2_d_drop = r2_d;
  out.g_d = (1.0 - r2_d) / r2_d;
  out.c_d = std::sqrt(k_d * out.g_d);
  return out;
}

BenchmarkMax benchmark_max(const std::vector<BenchmarkResult>& results) {
  BenchmarkMax out;
  for (const auto& r : results) {
    if (r.c_alpha_defined && r.c_alpha >= out.c_alpha) {
      out.c_alpha = r.c_alpha;
      out.group_alpha = r.group;
    }
    if (r.c_y >= out.c_y) {
      out.c_y = r.c_y;
      out.group_y = r.group;
    }
    if (r.c_d >= out.c_d) {
      out.c_d = r.c_d;
      out.group_d = r.group;
    }
  }
  return out;
}

}  // namespace ovb
