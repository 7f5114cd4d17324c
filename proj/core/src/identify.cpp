#include "ovb/identify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ovb {

PhiBounds phi_bounds(double lambda_lo, double lambda_hi, double gamma_lo, double gamma_hi,
                     double t) {
  if (lambda_lo > lambda_hi || gamma_lo > gamma_hi)
    throw std::invalid_argument("phi_bounds: bounds must be ordered");
  PhiBounds out;
  out.t = t;
  if (t >= 0.0) {
    out.phi_hi = lambda_hi - gamma_lo * t;
    out.phi_lo = lambda_lo - gamma_hi * t;
  } else {
    out.phi_hi = lambda_hi - gamma_hi * t;
    out.phi_lo = lambda_lo - gamma_lo * t;
  }
  return out;
}

ThetaSet theta_bounds(double lambda_lo, double lambda_hi, double gamma_lo, double gamma_hi) {
  if (lambda_lo > lambda_hi || gamma_lo > gamma_hi)
    throw std::invalid_argument("theta_bounds: bounds must be ordered");
  ThetaSet set;
  const double eps =
      1e-12 * std::max({1.0, std::abs(lambda_lo), std::abs(lambda_hi)});

  const bool glo_zero = std::abs(gamma_lo) < eps;
  const bool ghi_zero = std::abs(gamma_hi) < eps;
  if (glo_zero || ghi_zero) {
    // A zero endpoint leaves one side of the ratio undefined.
    set.kind = ThetaSetKind::FirstStageFailure;
    set.first_stage_failure = true;
    set.theorem_case = 0;
    return set;
  }

  const bool lambda_pos = lambda_lo >= 0.0;  // zero endpoints fall in the adjacent branch
  const bool lambda_neg = lambda_hi <= 0.0;

  if (gamma_lo > 0.0) {
    set.theorem_case = 1;
    set.kind = ThetaSetKind::Interval;
    if (lambda_pos) {
      set.lo = lambda_lo / gamma_hi;
      set.hi = lambda_hi / gamma_lo;
    } else if (lambda_neg) {
      set.lo = lambda_lo / gamma_lo;
      set.hi = lambda_hi / gamma_hi;
    } else {
      set.lo = lambda_lo / gamma_lo;
      set.hi = lambda_hi / gamma_lo;
    }
    return set;
  }
  if (gamma_hi < 0.0) {
    set.theorem_case = 2;
    set.kind = ThetaSetKind::Interval;
    if (lambda_pos) {
      set.lo = lambda_hi / gamma_hi;
      set.hi = lambda_lo / gamma_lo;
    } else if (lambda_neg) {
      set.lo = lambda_hi / gamma_lo;
      set.hi = lambda_lo / gamma_hi;
    } else {
      set.lo = lambda_hi / gamma_hi;
      set.hi = lambda_lo / gamma_hi;
    }
    return set;
  }

  // Mixed-sign gamma bounds: rays or the whole line.
  set.theorem_case = 3;
  set.first_stage_failure = true;
  double left_hi = 0.0, right_lo = 0.0;
  if (lambda_pos) {
    left_hi = lambda_lo / gamma_lo;
    right_lo = lambda_lo / gamma_hi;
  } else if (lambda_neg) {
    left_hi = lambda_hi / gamma_hi;
    right_lo = lambda_hi / gamma_lo;
  } else {
    set.kind = ThetaSetKind::WholeLine;
    return set;
  }
  if (left_hi >= right_lo) {
    set.kind = ThetaSetKind::WholeLine;  // rays overlap, e.g. a lambda endpoint at zero
    return set;
  }
  set.kind = ThetaSetKind::UnionOfRays;
  set.lo = left_hi;
  set.hi = right_lo;
  return set;
}

BoundSet ovb_bound_set(const ShortEstimates& est, const SensitivityConfig& cfg) {
  BoundSet out;
  auto [llo, lhi] = bias_bound_lambda(est, cfg);
  auto [glo, ghi] = bias_bound_gamma(est, cfg);
  out.lambda_lo = llo;
  out.lambda_hi = lhi;
  out.gamma_lo = glo;
  out.gamma_hi = ghi;
  out.theta_set = theta_bounds(llo, lhi, glo, ghi);
  return out;
}

}  // namespace ovb
