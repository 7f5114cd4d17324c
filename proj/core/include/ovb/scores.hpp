#pragma once

#include "ovb/model.hpp"

namespace ovb {

// Cross-fitted nuisance predictions for one observation. LATE/LATT use
// (pi, ey1, ey0, ed1, ed0, p_z); PLIVM uses (m, r, l).
struct NuisanceRow {
  double pi = 0.0;   // P(Z=1|X)
  double ey1 = 0.0;  // E[Y|Z=1,X]
  double ey0 = 0.0;
  double ed1 = 0.0;  // E[D|Z=1,X]
  double ed0 = 0.0;
  double m = 0.0;  // E[Y|X]
  double r = 0.0;  // E[D|X]
  double l = 0.0;  // E[Z|X]
  double p_z = 0.0;  // P(Z=1), scalar
};

// Uncentered per-observation moment contributions. s_lambda/s_gamma are the
// reduced-form and first-stage pieces (centering happens after pooling),
// s_alpha2 the squared weight, s_ry2/s_rd2 the squared regression residuals.
struct ScoreRow {
  double s_lambda = 0.0;
  double s_gamma = 0.0;
  double s_alpha2 = 0.0;
  double s_ry2 = 0.0;
  double s_rd2 = 0.0;
};

ScoreRow late_score_row(double y, double d, double z, const NuisanceRow& nv);
ScoreRow latt_score_row(double y, double d, double z, const NuisanceRow& nv);

// PLIVM: s_lambda = (y-m)(z-l), s_gamma = (d-r)(z-l), s_alpha2 = (z-l)^2.
// Residual variances need lambda_s/gamma_s and are filled in a second pass.
ScoreRow plivm_score_row(double y, double d, double z, const NuisanceRow& nv);

// diag(-E[(Z-l)^2], -E[(Z-l)^2], -1, -1, -1). LATE/LATT use -identity.
Mat5 plivm_jacobian(double mean_z_resid_sq);

}  // namespace ovb
