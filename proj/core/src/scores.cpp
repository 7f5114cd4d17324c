#include "ovb/scores.hpp"

#include <cmath>
#include <stdexcept>

namespace ovb {

ScoreRow late_score_row(double y, double d, double z, const NuisanceRow& nv) {
  if (!(nv.pi > 0.0 && nv.pi < 1.0))
    throw std::invalid_argument("late score: propensity must lie in (0,1), got " +
                                format_double(nv.pi));
  const double w = z / nv.pi - (1.0 - z) / (1.0 - nv.pi);
  const double gy = z * nv.ey1 + (1.0 - z) * nv.ey0;
  const double gd = z * nv.ed1 + (1.0 - z) * nv.ed0;
  ScoreRow s;
  s.s_lambda = w * (y - gy) + nv.ey1 - nv.ey0;
  s.s_gamma = w * (d - gd) + nv.ed1 - nv.ed0;
  s.s_alpha2 = w * w;
  s.s_ry2 = (y - gy) * (y - gy);
  s.s_rd2 = (d - gd) * (d - gd);
  return s;
}

ScoreRow latt_score_row(double y, double d, double z, const NuisanceRow& nv) {
  if (!(nv.pi > 0.0 && nv.pi < 1.0))
    throw std::invalid_argument("latt score: propensity must lie in (0,1), got " +
                                format_double(nv.pi));
  if (!(nv.p_z > 0.0 && nv.p_z < 1.0))
    throw std::invalid_argument("latt score: P(Z=1) must lie in (0,1), got " +
                                format_double(nv.p_z));
  const double odds = nv.pi / (1.0 - nv.pi);
  const double w = (z - odds * (1.0 - z)) / nv.p_z;
  const double gy = z * nv.ey1 + (1.0 - z) * nv.ey0;
  const double gd = z * nv.ed1 + (1.0 - z) * nv.ed0;
  ScoreRow s;
  s.s_lambda = w * (y - gy) + (z / nv.p_z) * (nv.ey1 - nv.ey0);
  s.s_gamma = w * (d - gd) + (z / nv.p_z) * (nv.ed1 - nv.ed0);
  s.s_alpha2 = w * w;
  s.s_ry2 = (y - gy) * (y - gy);
  s.s_rd2 = (d - gd) * (d - gd);
  return s;
}

ScoreRow plivm_score_row(double y, double d, double z, const NuisanceRow& nv) {
  const double zr = z - nv.l;
  ScoreRow s;
  s.s_lambda = (y - nv.m) * zr;
  s.s_gamma = (d - nv.r) * zr;
  s.s_alpha2 = zr * zr;
  s.s_ry2 = 0.0;  // second pass once lambda_s is known
  s.s_rd2 = 0.0;
  return s;
}

Mat5 plivm_jacobian(double mean_z_resid_sq) {
  if (!(mean_z_resid_sq > 0.0))
    throw std::invalid_argument("plivm jacobian: E[(Z-l)^2] must be positive, got " +
                                format_double(mean_z_resid_sq));
  return Mat5::diagonal({-mean_z_resid_sq, -mean_z_resid_sq, -1.0, -1.0, -1.0});
}

}  // namespace ovb
