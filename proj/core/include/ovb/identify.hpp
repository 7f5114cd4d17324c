#pragma once

#include "ovb/model.hpp"
#include "ovb/sensitivity.hpp"

namespace ovb {

struct PhiBounds {
  double t = 0.0;
  double phi_lo = 0.0;
  double phi_hi = 0.0;
};

// Envelope of lambda - gamma*t over the bound rectangle; piecewise linear in
// t with a kink at t = 0.
PhiBounds phi_bounds(double lambda_lo, double lambda_hi, double gamma_lo, double gamma_hi,
                     double t);

// Maps (lambda bounds, gamma bounds) to the identification set for theta0.
// Same-signed gamma bounds give an interval; mixed signs give rays or the
// whole line and raise the first-stage-failure flag; a gamma endpoint at
// zero leaves the bounds undefined.
ThetaSet theta_bounds(double lambda_lo, double lambda_hi, double gamma_lo, double gamma_hi);

// Convenience composition: sensitivity bounds for lambda and gamma plus the
// induced theta0 set.
BoundSet ovb_bound_set(const ShortEstimates& est, const SensitivityConfig& cfg);

}  // namespace ovb
