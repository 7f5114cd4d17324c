#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ovb/model.hpp"

namespace ovb {

// Raised when the constrained minimization behind the shrinkage CI finds no
// feasible critical values.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inverse standard normal CDF, absolute error well below 1e-9.
double normal_quantile(double p);
double normal_cdf(double x);

// P(Z1 >= -z_l and rho*Z1 - sqrt(1-rho^2)*Z2 <= c) for independent standard
// normals, by deterministic quadrature; absolute error below 1e-6.
double stoye_constraint_prob(double z_l, double c, double rho);

// Loadings onto the stacked influence vector
// (psi_lambda, psi_gamma, psi_v2, psi_sigmaY2, psi_sigmaD2).
struct CoefVector {
  Vec5 c{};
};

enum class BoundTarget { Lambda, Gamma, Phi };

// Influence loadings of the upper/lower OVB bounds: for phi_t the full
// |t|-dependent vectors, for lambda/gamma the t-free specializations.
std::pair<CoefVector, CoefVector> bound_coef_vectors(const ShortEstimates& est,
                                                     const SensitivityConfig& cfg, double t);
std::pair<CoefVector, CoefVector> target_coef_vectors(const ShortEstimates& est,
                                                      const SensitivityConfig& cfg,
                                                      BoundTarget target, double t = 0.0);

struct PairStats {
  double se_lo = 0.0;
  double se_hi = 0.0;
  double rho_hat = 1.0;
  bool degenerate = false;  // zero variance on at least one side
};

// Standard errors of the two bound estimators and the correlation between
// them, from the estimated covariance.
PairStats bound_pair_stats(const ShortEstimates& est, const SensitivityConfig& cfg,
                           BoundTarget target, double t = 0.0);

// [point_lo - z_{1-tau} se_lo, point_hi + z_{1-tau} se_hi].
Interval one_sided_ci(double point_lo, double point_hi, double se_lo, double se_hi, double tau);

// Bound estimates and test curves for phi_t at one t.
struct PhiAt {
  double phi_lo = 0.0, phi_hi = 0.0;
  double se_lo = 0.0, se_hi = 0.0;
  double rho_hat = 1.0;
};
PhiAt phi_at(const ShortEstimates& est, const SensitivityConfig& cfg, double t);

struct TRange {
  double lo = 0.0;
  double hi = 0.0;
};
TRange default_t_range(const ShortEstimates& est, const SensitivityConfig& cfg, double tau);

// Test inversion for theta0: the t values where the upper test curve stays
// nonnegative and the lower one nonpositive. Grid scan on the two segments
// t < 0 and t >= 0, endpoints refined by bisection.
ThetaCiResult invert_theta_ci(const ShortEstimates& est, const SensitivityConfig& cfg, double tau,
                              TRange range, int resolution = 2001);

struct RobustnessResult {
  double zeta_star = 0.0;
  bool already_insignificant = false;
};

// Smallest zeta = |rho| C C_alpha at which the relevant one-sided CI endpoint
// of the bound crosses zero.
RobustnessResult robustness_threshold(const ShortEstimates& est, BoundTarget target,
                                      double rho_abs, double tau);

struct ContourTable {
  std::vector<double> cc;            // C*C_alpha grid
  std::vector<double> lambda_lower;  // lower endpoint of the one-sided CI for lambda-
  std::vector<double> gamma_lower;
};
ContourTable contour_grid(const ShortEstimates& est, double rho_abs, double tau,
                          const std::vector<double>& cc_grid);

// Shrinkage-based uniformly valid CI for an interval-identified parameter;
// solves the two-constraint minimization for the critical values.
StoyeResult stoye_ci(double point_lo, double point_hi, double se_lo, double se_hi, double rho_hat,
                     std::size_t n, double tau);

struct StoyeThetaResult {
  ThetaCiResult ci;
  StoyeResult diagnostics;  // critical values etc. averaged over grid points inside the CI
};
StoyeThetaResult stoye_theta_ci(const ShortEstimates& est, const SensitivityConfig& cfg,
                                double tau, TRange range, int resolution = 2001);

struct ReportOptions {
  double tau = 0.025;
  double stoye_tau = 0.05;
  TRange t_range{0.0, 0.0};  // lo == hi: use default_t_range
  int t_resolution = 2001;
  int phi_curve_points = 201;
};

// Full CI family for one estimation: conventional and OVB-adjusted intervals,
// the inverted theta0 set, shrinkage CIs and the phi curve.
CIReport build_ci_report(const ShortEstimates& est, const SensitivityConfig& cfg,
                         const ReportOptions& opts);

}  // namespace ovb
