#include "ovb/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ovb/identify.hpp"
#include "ovb/sensitivity.hpp"

namespace ovb {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double x) { return 0.39894228040143267794 * std::exp(-0.5 * x * x); }

// Rational initial guess (Acklam) refined by one Halley step against erfc.
double quantile_guess(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must lie in (0,1), got " + format_double(p));
  double x = quantile_guess(p);
  // Halley refinement with the error evaluated on the small tail side, so no
  // precision is lost near p = 1.
  const double e = p < 0.5 ? 0.5 * std::erfc(-x * 0.7071067811865475244) - p
                           : (1.0 - p) - 0.5 * std::erfc(x * 0.7071067811865475244);
  const double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

// 10-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGlNode[10] = {-0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
                                -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
                                0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
                                0.9739065285171717};
constexpr double kGlWeight[10] = {0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
                                  0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
                                  0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                                  0.0666713443086881};

double integrate_gl(double lo, double hi, double panel_width, double rho, double c, double s) {
  if (hi <= lo) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel_width)));
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double mid = lo + (pnl + 0.5) * h;
    double acc = 0.0;
    for (int q = 0; q < 10; ++q) {
      const double z = mid + 0.5 * h * kGlNode[q];
      acc += kGlWeight[q] * normal_pdf(z) * normal_cdf((c - rho * z) / s);
    }
    total += 0.5 * h * acc;
  }
  return total;
}

}  // namespace

double stoye_constraint_prob(double z_l, double c, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("stoye_constraint_prob: rho must lie in [-1,1]");
  if (std::isinf(c)) return c > 0 ? normal_cdf(z_l) : 0.0;

  if (std::abs(rho) >= 1.0 - 1e-12) {
    // Degenerate line: rho*Z1 <= c restricted to Z1 >= -z_l.
    if (rho > 0.0) return std::max(0.0, normal_cdf(c) - normal_cdf(-z_l));
    return 1.0 - normal_cdf(std::max(-z_l, -c));
  }

  const double s = std::sqrt(1.0 - rho * rho);
  const double lo = std::max(-z_l, -9.0);
  const double hi = 9.0;
  if (lo >= hi) return 0.0;

  if (std::abs(rho) < 1e-8) return normal_cdf(z_l) * normal_cdf(c / s);

  // The inner CDF transitions around z* = c/rho over a width ~ s/|rho|;
  // outside a generous window it is flat at 0 or 1 to double precision.
  const double sprime = s / std::abs(rho);
  const double zstar = c / rho;
  const double a = zstar - 40.0 * sprime;
  const double b = zstar + 40.0 * sprime;
  const double m_lo = std::clamp(a, lo, hi);
  const double m_hi = std::clamp(b, lo, hi);

  double total = 0.0;
  // Flat sides: for rho > 0 the CDF is 1 left of the window, 0 right of it
  // (mirrored for rho < 0).
  if (rho > 0.0) {
    if (m_lo > lo) total += normal_cdf(m_lo) - normal_cdf(lo);
  } else {
    if (m_hi < hi) total += normal_cdf(hi) - normal_cdf(m_hi);
  }
  const double width = std::min(0.75, 5.0 * sprime);
  total += integrate_gl(m_lo, m_hi, width, rho, c, s);
  return total;
}

std::pair<CoefVector, CoefVector> bound_coef_vectors(const ShortEstimates& est,
                                                     const SensitivityConfig& cfg, double t) {
  const double zeta_y = cfg.zeta_y();
  const double zeta_d = cfg.zeta_d();
  if (zeta_y > 0.0 && (!(est.v_s2 > 0.0) || !(est.sigma_ys2 > 0.0)))
    throw std::invalid_argument("bound_coef_vectors: zero variance with nonzero zeta_Y");
  if (zeta_d > 0.0 && t != 0.0 && (!(est.v_s2 > 0.0) || !(est.sigma_ds2 > 0.0)))
    throw std::invalid_argument("bound_coef_vectors: zero variance with nonzero zeta_D");

  const double v = std::sqrt(std::max(est.v_s2, 0.0));
  const double sy = std::sqrt(std::max(est.sigma_ys2, 0.0));
  const double sd = std::sqrt(std::max(est.sigma_ds2, 0.0));
  const double at = std::abs(t);

  double e3 = 0.0, e4 = 0.0, e5 = 0.0;
  if (zeta_y > 0.0) {
    e3 += zeta_y * sy / (2.0 * v);
    e4 = zeta_y * v / (2.0 * sy);
  }
  if (zeta_d > 0.0 && at > 0.0) {
    e3 += zeta_d * sd * at / (2.0 * v);
    e5 = zeta_d * v * at / (2.0 * sd);
  }
  CoefVector plus{{1.0, -t, e3, e4, e5}};
  CoefVector minus{{1.0, -t, -e3, -e4, -e5}};
  return {plus, minus};
}

std::pair<CoefVector, CoefVector> target_coef_vectors(const ShortEstimates& est,
                                                      const SensitivityConfig& cfg,
                                                      BoundTarget target, double t) {
  if (target == BoundTarget::Phi) return bound_coef_vectors(est, cfg, t);

  const double v = std::sqrt(std::max(est.v_s2, 0.0));
  if (target == BoundTarget::Lambda) {
    const double zeta = cfg.zeta_y();
    if (zeta > 0.0 && (!(est.v_s2 > 0.0) || !(est.sigma_ys2 > 0.0)))
      throw std::invalid_argument("target_coef_vectors: zero variance with nonzero zeta_Y");
    const double sy = std::sqrt(std::max(est.sigma_ys2, 0.0));
    const double e3 = zeta > 0.0 ? zeta * sy / (2.0 * v) : 0.0;
    const double e4 = zeta > 0.0 ? zeta * v / (2.0 * sy) : 0.0;
    return {CoefVector{{1.0, 0.0, e3, e4, 0.0}}, CoefVector{{1.0, 0.0, -e3, -e4, 0.0}}};
  }
  const double zeta = cfg.zeta_d();
  if (zeta > 0.0 && (!(est.v_s2 > 0.0) || !(est.sigma_ds2 > 0.0)))
    throw std::invalid_argument("target_coef_vectors: zero variance with nonzero zeta_D");
  const double sd = std::sqrt(std::max(est.sigma_ds2, 0.0));
  const double e3 = zeta > 0.0 ? zeta * sd / (2.0 * v) : 0.0;
  const double e5 = zeta > 0.0 ? zeta * v / (2.0 * sd) : 0.0;
  return {CoefVector{{0.0, 1.0, e3, 0.0, e5}}, CoefVector{{0.0, 1.0, -e3, 0.0, -e5}}};
}

PairStats bound_pair_stats(const ShortEstimates& est, const SensitivityConfig& cfg,
                           BoundTarget target, double t) {
  const auto [c_plus, c_minus] = target_coef_vectors(est, cfg, target, t);
  const double dn = static_cast<double>(est.n);
  const double var_hi = est.omega.quad_form(c_plus.c, c_plus.c) / dn;
  const double var_lo = est.omega.quad_form(c_minus.c, c_minus.c) / dn;
  const double cov = est.omega.quad_form(c_plus.c, c_minus.c) / dn;

  PairStats stats;
  stats.se_hi = var_hi > 0.0 ? std::sqrt(var_hi) : 0.0;
  stats.se_lo = var_lo > 0.0 ? std::sqrt(var_lo) : 0.0;
  if (stats.se_hi > 0.0 && stats.se_lo > 0.0) {
    stats.rho_hat = std::clamp(cov / (stats.se_hi * stats.se_lo), -1.0, 1.0);
  } else {
    stats.rho_hat = 1.0;
    stats.degenerate = true;
  }
  return stats;
}

Interval one_sided_ci(double point_lo, double point_hi, double se_lo, double se_hi, double tau) {
  if (!(tau > 0.0 && tau <= 0.5))
    throw std::invalid_argument("one_sided_ci: tau must lie in (0, 0.5]");
  if (se_lo < 0.0 || se_hi < 0.0) throw std::invalid_argument("one_sided_ci: negative se");
  const double zq = normal_quantile(1.0 - tau);
  return Interval{point_lo - zq * se_lo, point_hi + zq * se_hi};
}

PhiAt phi_at(const ShortEstimates& est, const SensitivityConfig& cfg, double t) {
  const auto [llo, lhi] = bias_bound_lambda(est, cfg);
  const auto [glo, ghi] = bias_bound_gamma(est, cfg);
  const PhiBounds pb = phi_bounds(llo, lhi, glo, ghi, t);
  const PairStats stats = bound_pair_stats(est, cfg, BoundTarget::Phi, t);
  PhiAt out;
  out.phi_lo = pb.phi_lo;
  out.phi_hi = pb.phi_hi;
  out.se_lo = stats.se_lo;
  out.se_hi = stats.se_hi;
  out.rho_hat = stats.rho_hat;
  return out;
}

TRange default_t_range(const ShortEstimates& est, const SensitivityConfig& cfg, double tau) {
  double center = 0.0;
  double scale = 1.0;
  if (est.theta_defined()) {
    center = est.theta_s();
    const BoundSet bounds = ovb_bound_set(est, cfg);
    double half_width = 0.0;
    if (bounds.theta_set.kind == ThetaSetKind::Interval)
      half_width = 0.5 * (bounds.theta_set.hi - bounds.theta_set.lo);
    // Delta-method width of theta_s as a fallback scale.
    const Vec5 grad{1.0 / est.gamma_s, -est.lambda_s / (est.gamma_s * est.gamma_s), 0.0, 0.0, 0.0};
    const double var_theta = est.omega.quad_form(grad, grad) / static_cast<double>(est.n);
    const double se_width =
        var_theta > 0.0 ? normal_quantile(1.0 - tau) * std::sqrt(var_theta) : 0.0;
    scale = std::max({std::abs(center), half_width, se_width, 1e-8});
  }
  return TRange{center - 20.0 * scale, center + 20.0 * scale};
}

namespace {

// Feasibility grid over [range.lo, range.hi] with the t = 0 kink as a grid
// point of both segments.
std::vector<double> inversion_grid(TRange range, int resolution) {
  std::vector<double> grid;
  const int res = std::max(resolution, 3);
  auto add_segment = [&](double lo, double hi) {
    if (hi <= lo) return;
    for (int i = 0; i < res; ++i)
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(res - 1));
  };
  if (range.lo < 0.0 && range.hi > 0.0) {
    add_segment(range.lo, 0.0);
    add_segment(0.0, range.hi);
  } else {
    add_segment(range.lo, range.hi);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

template <typename Feasible>
ThetaCiResult invert_feasible_set(const std::vector<double>& grid, Feasible&& feasible) {
  ThetaCiResult out;
  std::vector<char> ok(grid.size());
  std::size_t first = grid.size(), last = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ok[i] = feasible(grid[i]) ? 1 : 0;
    if (ok[i]) {
      if (first == grid.size()) first = i;
      last = i;
    }
  }
  if (first == grid.size()) {
    out.empty = true;
    return out;
  }

  auto refine = [&](double bad, double good) {
    // Bisection on the feasibility indicator; 'good' stays feasible.
    for (int iter = 0; iter < 80; ++iter) {
      const double mid = 0.5 * (bad + good);
      if (mid == bad || mid == good) break;
      (feasible(mid) ? good : bad) = mid;
    }
    return good;
  };

  if (first == 0) {
    out.unbounded_below = true;
    out.ci.lo = grid.front();
  } else {
    out.ci.lo = refine(grid[first - 1], grid[first]);
  }
  if (last + 1 == grid.size()) {
    out.unbounded_above = true;
    out.ci.hi = grid.back();
  } else {
    out.ci.hi = refine(grid[last + 1], grid[last]);
  }
  return out;
}

}  // namespace

ThetaCiResult invert_theta_ci(const ShortEstimates& est, const SensitivityConfig& cfg, double tau,
                              TRange range, int resolution) {
  if (!(tau > 0.0 && tau <= 0.5))
    throw std::invalid_argument("invert_theta_ci: tau must lie in (0, 0.5]");
  if (!(range.hi > range.lo) || !std::isfinite(range.lo) || !std::isfinite(range.hi))
    throw std::invalid_argument("invert_theta_ci: t range must be finite with positive width");
  const double zq = normal_quantile(1.0 - tau);
  const auto grid = inversion_grid(range, resolution);
  auto feasible = [&](double t) {
    const PhiAt p = phi_at(est, cfg, t);
    return p.phi_hi + zq * p.se_hi >= 0.0 && p.phi_lo - zq * p.se_lo <= 0.0;
  };
  return invert_feasible_set(grid, feasible);
}

namespace {

// One-sided CI endpoint of the lower (or upper, for negative estimates)
// bound as a function of zeta, for lambda or gamma.
double bound_ci_endpoint(const ShortEstimates& est, BoundTarget target, double zeta, double zq) {
  const double point = target == BoundTarget::Lambda ? est.lambda_s : est.gamma_s;
  const double sig2 = target == BoundTarget::Lambda ? est.sigma_ys2 : est.sigma_ds2;
  const double s_scale = std::sqrt(std::max(0.0, sig2 * est.v_s2));
  SensitivityConfig cfg;
  cfg.rho_y_abs = 1.0;
  cfg.rho_d_abs = 1.0;
  cfg.c_alpha = 1.0;
  if (target == BoundTarget::Lambda)
    cfg.c_y = zeta;
  else
    cfg.c_d = zeta;
  const PairStats stats = bound_pair_stats(est, cfg, target);
  if (point >= 0.0) return point - zeta * s_scale - zq * stats.se_lo;
  return point + zeta * s_scale + zq * stats.se_hi;
}

}  // namespace

RobustnessResult robustness_threshold(const ShortEstimates& est, BoundTarget target,
                                      double rho_abs, double tau) {
  if (target == BoundTarget::Phi)
    throw std::invalid_argument("robustness_threshold: target must be lambda or gamma");
  const double point = target == BoundTarget::Lambda ? est.lambda_s : est.gamma_s;
  if (point == 0.0) throw std::invalid_argument("robustness_threshold: estimate is zero");
  if (!(rho_abs > 0.0 && rho_abs <= 1.0))
    throw std::invalid_argument("robustness_threshold: rho_abs must lie in (0, 1]");
  const double zq = normal_quantile(1.0 - tau);

  // Crossing test in the zeta = |rho| C C_alpha product; the endpoint moves
  // toward zero as zeta grows.
  auto endpoint = [&](double cc) { return bound_ci_endpoint(est, target, rho_abs * cc, zq); };
  const double sign = point >= 0.0 ? 1.0 : -1.0;

  RobustnessResult out;
  if (sign * endpoint(0.0) <= 0.0) {
    out.already_insignificant = true;
    out.zeta_star = 0.0;
    return out;
  }
  double lo = 0.0, hi = 1.0;
  int expansions = 0;
  while (sign * endpoint(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 60) {  // bound never crosses (zero spread)
      out.zeta_star = kInf;
      return out;
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (sign * endpoint(mid) > 0.0 ? lo : hi) = mid;
  }
  out.zeta_star = 0.5 * (lo + hi);
  return out;
}

ContourTable contour_grid(const ShortEstimates& est, double rho_abs, double tau,
                          const std::vector<double>& cc_grid) {
  for (double cc : cc_grid)
    if (!(cc >= 0.0)) throw std::invalid_argument("contour_grid: zeta values must be >= 0");
  const double zq = normal_quantile(1.0 - tau);
  ContourTable table;
  table.cc = cc_grid;
  table.lambda_lower.reserve(cc_grid.size());
  table.gamma_lower.reserve(cc_grid.size());
  for (double cc : cc_grid) {
    table.lambda_lower.push_back(bound_ci_endpoint(est, BoundTarget::Lambda, rho_abs * cc, zq));
    table.gamma_lower.push_back(bound_ci_endpoint(est, BoundTarget::Gamma, rho_abs * cc, zq));
  }
  return table;
}

namespace {

struct StoyeProblem {
  double rho = 1.0;
  double shift_u = 0.0;  // Delta*/se_hi
  double shift_l = 0.0;  // Delta*/se_lo
  double tau = 0.05;

  double constraint1(double z_l, double z_u) const {
    return stoye_constraint_prob(z_l, z_u + shift_u, rho);
  }
  double constraint2(double z_l, double z_u) const {
    return stoye_constraint_prob(z_u, z_l + shift_l, rho);
  }
};

constexpr double kZMax = 9.0;

// Smallest z_l meeting both constraints at this z_u, or +inf if none exists.
double min_feasible_zl(const StoyeProblem& prob, double z_u) {
  const double target = 1.0 - prob.tau;
  auto solve = [&](auto&& f) -> double {
    if (f(kZMax) < target) return kInf;
    double lo = -kZMax, hi = kZMax;
    if (f(lo) >= target) return lo;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) >= target ? hi : lo) = mid;
    }
    return hi;
  };
  const double z1 = solve([&](double z) { return prob.constraint1(z, z_u); });
  if (z1 == kInf) return kInf;
  const double z2 = solve([&](double z) { return prob.constraint2(z, z_u); });
  if (z2 == kInf) return kInf;
  return std::max(z1, z2);
}

struct StoyeSolution {
  double z_l = 0.0, z_u = 0.0, objective = 0.0;
};

// Minimize z_l*sigma_l + z_u*sigma_u along the feasible boundary by a coarse
// scan over z_u followed by lattice refinement.
StoyeSolution solve_stoye(const StoyeProblem& prob, double sigma_l, double sigma_u,
                          double hint_z_u = -1.0) {
  auto objective = [&](double z_u) -> std::pair<double, double> {
    const double z_l = min_feasible_zl(prob, z_u);
    if (z_l == kInf) return {kInf, kInf};
    return {z_l * sigma_l + z_u * sigma_u, z_l};
  };

  double lo = 0.0, hi = kZMax;
  int coarse = 101;
  if (hint_z_u >= 0.0) {
    lo = std::max(0.0, hint_z_u - 0.5);
    hi = std::min(kZMax, hint_z_u + 0.5);
    coarse = 11;
  }

  double best_zu = -1.0, best_obj = kInf, best_zl = kInf;
  double step = (hi - lo) / (coarse - 1);
  for (int i = 0; i < coarse; ++i) {
    const double z_u = lo + i * step;
    const auto [obj, z_l] = objective(z_u);
    if (obj < best_obj) {
      best_obj = obj;
      best_zu = z_u;
      best_zl = z_l;
    }
  }
  if (best_zu < 0.0 && hint_z_u >= 0.0) return solve_stoye(prob, sigma_l, sigma_u);  // widen
  if (best_zu < 0.0)
    throw SolverError(
        "stoye_ci: no feasible critical values found (tau=" + format_double(prob.tau) +
        ", rho=" + format_double(prob.rho) + ", shifts=" + format_double(prob.shift_l) + "," +
        format_double(prob.shift_u) + ")");

  while (step > 1e-7) {
    const double new_lo = std::max(0.0, best_zu - step);
    const double new_hi = std::min(kZMax, best_zu + step);
    step = (new_hi - new_lo) / 10.0;
    for (int i = 0; i <= 10; ++i) {
      const double z_u = new_lo + i * step;
      const auto [obj, z_l] = objective(z_u);
      if (obj < best_obj) {
        best_obj = obj;
        best_zu = z_u;
        best_zl = z_l;
      }
    }
  }
  return StoyeSolution{best_zl, best_zu, best_obj};
}

}  // namespace

StoyeResult stoye_ci(double point_lo, double point_hi, double se_lo, double se_hi, double rho_hat,
                     std::size_t n, double tau) {
  if (!(tau > 0.0 && tau <= 0.5)) throw std::invalid_argument("stoye_ci: tau must lie in (0,0.5]");
  if (n < 2) throw std::invalid_argument("stoye_ci: n must be >= 2");
  if (se_lo < 0.0 || se_hi < 0.0) throw std::invalid_argument("stoye_ci: negative se");

  StoyeResult out;
  out.rho_hat = std::clamp(rho_hat, -1.0, 1.0);

  const double dn = static_cast<double>(n);
  const double sigma_l = se_lo * std::sqrt(dn);
  const double sigma_u = se_hi * std::sqrt(dn);
  const double loglog = std::max(0.0, std::log(std::log(dn)));
  const double vartheta = std::sqrt(loglog / dn) * std::max(sigma_l, sigma_u);
  const double delta = point_hi - point_lo;
  out.delta_star = delta > vartheta ? delta : 0.0;

  if (se_lo == 0.0 && se_hi == 0.0) {
    // Point-mass bounds: the interval itself is the CI.
    out.degenerate_variance = true;
    out.z_l_star = out.z_u_star = normal_quantile(1.0 - tau);
    out.ci = Interval{point_lo, point_hi};
    out.min_objective = 0.0;
    return out;
  }

  StoyeProblem prob;
  prob.rho = out.rho_hat;
  prob.tau = tau;
  prob.shift_u = out.delta_star == 0.0 ? 0.0 : (se_hi > 0.0 ? out.delta_star / se_hi : kInf);
  prob.shift_l = out.delta_star == 0.0 ? 0.0 : (se_lo > 0.0 ? out.delta_star / se_lo : kInf);

  const StoyeSolution sol = solve_stoye(prob, sigma_l, sigma_u);
  out.z_l_star = sol.z_l;
  out.z_u_star = sol.z_u;
  out.min_objective = sol.objective;
  const double lo_end = point_lo - se_lo * sol.z_l;
  const double hi_end = point_hi + se_hi * sol.z_u;
  if (lo_end <= hi_end)
    out.ci = Interval{lo_end, hi_end};
  else
    out.empty = true;
  return out;
}

StoyeThetaResult stoye_theta_ci(const ShortEstimates& est, const SensitivityConfig& cfg,
                                double tau, TRange range, int resolution) {
  if (!(tau > 0.0 && tau <= 0.5))
    throw std::invalid_argument("stoye_theta_ci: tau must lie in (0, 0.5]");
  if (!(range.hi > range.lo))
    throw std::invalid_argument("stoye_theta_ci: t range must have positive width");

  const double dn = static_cast<double>(est.n);
  const double loglog = std::max(0.0, std::log(std::log(dn)));

  double hint = -1.0;
  auto solve_at = [&](double t) {
    const PhiAt p = phi_at(est, cfg, t);
    StoyeProblem prob;
    prob.rho = p.rho_hat;
    prob.tau = tau;
    const double sigma_l = p.se_lo * std::sqrt(dn);
    const double sigma_u = p.se_hi * std::sqrt(dn);
    const double vartheta = std::sqrt(loglog / dn) * std::max(sigma_l, sigma_u);
    const double delta = p.phi_hi - p.phi_lo;
    const double delta_star = delta > vartheta ? delta : 0.0;
    prob.shift_u = delta_star == 0.0 ? 0.0 : (p.se_hi > 0.0 ? delta_star / p.se_hi : kInf);
    prob.shift_l = delta_star == 0.0 ? 0.0 : (p.se_lo > 0.0 ? delta_star / p.se_lo : kInf);

    StoyeResult r;
    r.rho_hat = p.rho_hat;
    r.delta_star = delta_star;
    if (p.se_lo == 0.0 && p.se_hi == 0.0) {
      r.degenerate_variance = true;
      r.z_l_star = r.z_u_star = normal_quantile(1.0 - tau);
      r.ci = Interval{p.phi_lo, p.phi_hi};
      return r;
    }
    const StoyeSolution sol = solve_stoye(prob, sigma_l, sigma_u, hint);
    hint = sol.z_u;
    r.z_l_star = sol.z_l;
    r.z_u_star = sol.z_u;
    r.min_objective = sol.objective;
    const double lo_end = p.phi_lo - p.se_lo * sol.z_l;
    const double hi_end = p.phi_hi + p.se_hi * sol.z_u;
    if (lo_end <= hi_end)
      r.ci = Interval{lo_end, hi_end};
    else
      r.empty = true;
    return r;
  };

  auto feasible = [&](double t) {
    const StoyeResult r = solve_at(t);
    return !r.empty && r.ci.lo <= 0.0 && 0.0 <= r.ci.hi;
  };

  const auto grid = inversion_grid(range, resolution);
  StoyeThetaResult out;
  out.ci = invert_feasible_set(grid, feasible);

  // Averaged diagnostics over grid points inside the reported set.
  if (!out.ci.empty) {
    double zl = 0.0, zu = 0.0, ds = 0.0, obj = 0.0, rho = 0.0;
    std::size_t count = 0;
    for (double t : grid) {
      if (t < out.ci.ci.lo || t > out.ci.ci.hi) continue;
      const StoyeResult r = solve_at(t);
      if (!r.empty && r.ci.lo <= 0.0 && 0.0 <= r.ci.hi) {
        zl += r.z_l_star;
        zu += r.z_u_star;
        ds += r.delta_star;
        obj += r.min_objective;
        rho += r.rho_hat;
        ++count;
      }
    }
    if (count > 0) {
      out.diagnostics.z_l_star = zl / count;
      out.diagnostics.z_u_star = zu / count;
      out.diagnostics.delta_star = ds / count;
      out.diagnostics.min_objective = obj / count;
      out.diagnostics.rho_hat = rho / count;
      out.diagnostics.ci = out.ci.ci;
    }
  } else {
    out.diagnostics.empty = true;
  }
  return out;
}

CIReport build_ci_report(const ShortEstimates& est, const SensitivityConfig& cfg,
                         const ReportOptions& opts) {
  CIReport report;
  report.tau = opts.tau;

  const auto [llo, lhi] = bias_bound_lambda(est, cfg);
  const auto [glo, ghi] = bias_bound_gamma(est, cfg);
  const PairStats lstats = bound_pair_stats(est, cfg, BoundTarget::Lambda);
  const PairStats gstats = bound_pair_stats(est, cfg, BoundTarget::Gamma);
  report.lambda_ci = one_sided_ci(llo, lhi, lstats.se_lo, lstats.se_hi, opts.tau);
  report.gamma_ci = one_sided_ci(glo, ghi, gstats.se_lo, gstats.se_hi, opts.tau);

  SensitivityConfig zero;  // conventional reference at zeta = 0
  const PairStats l0 = bound_pair_stats(est, zero, BoundTarget::Lambda);
  const PairStats g0 = bound_pair_stats(est, zero, BoundTarget::Gamma);
  report.lambda_conventional =
      one_sided_ci(est.lambda_s, est.lambda_s, l0.se_lo, l0.se_hi, opts.tau);
  report.gamma_conventional = one_sided_ci(est.gamma_s, est.gamma_s, g0.se_lo, g0.se_hi, opts.tau);

  TRange range = opts.t_range;
  if (!(range.hi > range.lo)) range = default_t_range(est, cfg, opts.tau);
  report.theta0_ci = invert_theta_ci(est, cfg, opts.tau, range, opts.t_resolution);
  report.theta0_conventional = invert_theta_ci(est, zero, opts.tau, range, opts.t_resolution);

  report.stoye_lambda =
      stoye_ci(llo, lhi, lstats.se_lo, lstats.se_hi, lstats.rho_hat, est.n, opts.stoye_tau);
  report.stoye_gamma =
      stoye_ci(glo, ghi, gstats.se_lo, gstats.se_hi, gstats.rho_hat, est.n, opts.stoye_tau);
  const StoyeThetaResult st = stoye_theta_ci(est, cfg, opts.stoye_tau, range,
                                             std::max(51, opts.t_resolution / 5));
  report.stoye_theta = st.diagnostics;
  report.stoye_theta_ci = st.ci;

  const double zq = normal_quantile(1.0 - opts.tau);
  const int points = std::max(3, opts.phi_curve_points);
  report.phi_curve.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = range.lo + (range.hi - range.lo) * i / (points - 1);
    const PhiAt p = phi_at(est, cfg, t);
    PhiCurveRow row;
    row.t = t;
    row.phi_lo = p.phi_lo;
    row.phi_hi = p.phi_hi;
    row.se_lo = p.se_lo;
    row.se_hi = p.se_hi;
    row.ci_lo = p.phi_lo - zq * p.se_lo;
    row.ci_hi = p.phi_hi + zq * p.se_hi;
    report.phi_curve.push_back(row);
  }
  return report;
}

}  // namespace ovb
