#include "ovb/simdgp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ovb/rng.hpp"

namespace ovb::sim {

namespace {

constexpr int kAt = 0, kNt = 1, kC = 2;

double treat_value(int type, double z) {
  if (type == kAt) return 1.0;
  if (type == kNt) return 0.0;
  return z;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument("dgp: " + msg);
}

}  // namespace

void DgpSpec::check() const {
  require(nx >= 1 && na >= 1, "support sizes must be positive");
  const auto cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(na);
  require(px.size() == static_cast<std::size_t>(nx), "px size mismatch");
  double sx = 0.0;
  for (double p : px) {
    require(p >= 0.0, "px entries must be nonnegative");
    sx += p;
  }
  require(std::abs(sx - 1.0) < 1e-9, "px must sum to 1");
  require(pa.size() == cells, "pa size mismatch");
  for (int x = 0; x < nx; ++x) {
    double sa = 0.0;
    for (int a = 0; a < na; ++a) sa += pa[cell(x, a)];
    require(std::abs(sa - 1.0) < 1e-9, "pa rows must sum to 1");
  }
  if (estimand == Estimand::PLIVM) {
    require(z_mean.size() == cells && f_tab.size() == cells && h_tab.size() == cells,
            "PLIVM tables must cover every (x,a) cell");
    require(sigma_z > 0.0, "sigma_z must be positive");
    require(sigma_uy >= 0.0 && sigma_ud >= 0.0, "noise scales must be nonnegative");
    return;
  }
  require(pi.size() == cells, "pi size mismatch");
  for (double p : pi) require(p > 0.0 && p < 1.0, "pi entries must lie in (0,1)");
  require(type_probs.size() == cells, "type_probs size mismatch");
  for (const auto& t : type_probs) {
    require(t[0] >= 0.0 && t[1] >= 0.0 && t[2] >= 0.0, "type probabilities must be nonnegative");
    require(std::abs(t[0] + t[1] + t[2] - 1.0) < 1e-9, "type probabilities must sum to 1");
  }
  require(mu.size() == cells, "mu size mismatch");
  require(noise_scale >= 0.0, "noise scale must be nonnegative");
}

namespace {

// Dummy columns for the x levels plus independent Bernoulli noise columns.
void emit_covariates(const DgpSpec& spec, const std::vector<int>& x_level, Rng& rng,
                     Dataset& data) {
  const std::size_t n = x_level.size();
  const int ncols = std::max(1, spec.nx - 1) + spec.n_noise_covariates;
  data.x = Matrix(n, static_cast<std::size_t>(ncols));
  data.names.clear();
  if (spec.nx == 1) {
    data.names.push_back("x1");  // constant column keeps learners well-formed
  } else {
    for (int lvl = 1; lvl < spec.nx; ++lvl) data.names.push_back("x" + std::to_string(lvl));
    for (std::size_t i = 0; i < n; ++i)
      if (x_level[i] > 0) data.x(i, static_cast<std::size_t>(x_level[i] - 1)) = 1.0;
  }
  for (int j = 0; j < spec.n_noise_covariates; ++j) {
    data.names.push_back("w" + std::to_string(j + 1));
    const std::size_t col = static_cast<std::size_t>(std::max(1, spec.nx - 1) + j);
    for (std::size_t i = 0; i < n; ++i) data.x(i, col) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  }
}

}  // namespace

GeneratedData generate(const DgpSpec& spec) {
  spec.check();
  if (spec.n == 0) throw std::invalid_argument("dgp: n must be positive");
  Rng rng(spec.seed);
  GeneratedData out;
  out.data.y.resize(spec.n);
  out.data.d.resize(spec.n);
  out.data.z.resize(spec.n);
  out.x_level.resize(spec.n);
  out.a_level.resize(spec.n);

  std::vector<double> px = spec.px;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int x = static_cast<int>(rng.categorical(px));
    std::vector<double> pa_row(static_cast<std::size_t>(spec.na));
    for (int a = 0; a < spec.na; ++a) pa_row[static_cast<std::size_t>(a)] = spec.pa[spec.cell(x, a)];
    const int a = static_cast<int>(rng.categorical(pa_row));
    out.x_level[i] = x;
    out.a_level[i] = a;
    const std::size_t c = spec.cell(x, a);

    if (spec.estimand == Estimand::PLIVM) {
      const double z = spec.z_mean[c] + spec.sigma_z * rng.normal();
      const double d = spec.gamma_coef * z + spec.h_tab[c] + spec.sigma_ud * rng.normal();
      const double y = spec.theta * d + spec.f_tab[c] + spec.sigma_uy * rng.normal();
      out.data.z[i] = z;
      out.data.d[i] = d;
      out.data.y[i] = y;
    } else {
      const double z = rng.bernoulli(spec.pi[c]) ? 1.0 : 0.0;
      const auto& tp = spec.type_probs[c];
      const int type = static_cast<int>(rng.categorical({tp[0], tp[1], tp[2]}));
      const double d = treat_value(type, z);
      const double mean = spec.mu[c][static_cast<std::size_t>(type * 2 + static_cast<int>(z))];
      out.data.z[i] = z;
      out.data.d[i] = d;
      out.data.y[i] = mean + spec.noise_scale * rng.normal();
    }
  }
  emit_covariates(spec, out.x_level, rng, out.data);
  return out;
}

namespace {

OracleTruth oracle_binary_iv(const DgpSpec& spec) {
  OracleTruth truth;
  const bool latt = spec.estimand == Estimand::LATT;

  std::vector<double> pi_s(static_cast<std::size_t>(spec.nx), 0.0);
  double p_z = 0.0;
  for (int x = 0; x < spec.nx; ++x) {
    for (int a = 0; a < spec.na; ++a)
      pi_s[static_cast<std::size_t>(x)] += spec.pa[spec.cell(x, a)] * spec.pi[spec.cell(x, a)];
    p_z += spec.px[static_cast<std::size_t>(x)] * pi_s[static_cast<std::size_t>(x)];
  }

  auto weight_long = [&](double z, int x, int a) {
    const double p = spec.pi[spec.cell(x, a)];
    if (latt) return (z - (p / (1.0 - p)) * (1.0 - z)) / p_z;
    return z / p - (1.0 - z) / (1.0 - p);
  };
  auto weight_short = [&](double z, int x) {
    const double p = pi_s[static_cast<std::size_t>(x)];
    if (latt) return (z - (p / (1.0 - p)) * (1.0 - z)) / p_z;
    return z / p - (1.0 - z) / (1.0 - p);
  };
  auto g_y = [&](double z, int x, int a) {
    const auto& tp = spec.type_probs[spec.cell(x, a)];
    const auto& m = spec.mu[spec.cell(x, a)];
    const auto zi = static_cast<std::size_t>(z);
    return tp[0] * m[0 + zi] + tp[1] * m[2 + zi] + tp[2] * m[4 + zi];
  };
  auto var_y = [&](double z, int x, int a) {
    const auto& tp = spec.type_probs[spec.cell(x, a)];
    const auto& m = spec.mu[spec.cell(x, a)];
    const auto zi = static_cast<std::size_t>(z);
    const double mean = g_y(z, x, a);
    double second = tp[0] * m[0 + zi] * m[0 + zi] + tp[1] * m[2 + zi] * m[2 + zi] +
                    tp[2] * m[4 + zi] * m[4 + zi];
    return second - mean * mean + spec.noise_scale * spec.noise_scale;
  };
  auto g_d = [&](double z, int x, int a) {
    const auto& tp = spec.type_probs[spec.cell(x, a)];
    return tp[0] + tp[2] * z;
  };

  // Conditional means of Y and D given the short information set (z, x).
  std::vector<double> g_ys(static_cast<std::size_t>(spec.nx) * 2, 0.0);
  std::vector<double> g_ds(static_cast<std::size_t>(spec.nx) * 2, 0.0);
  for (int x = 0; x < spec.nx; ++x) {
    for (int zi = 0; zi < 2; ++zi) {
      const double z = zi;
      const double pz_x = zi == 1 ? pi_s[static_cast<std::size_t>(x)]
                                  : 1.0 - pi_s[static_cast<std::size_t>(x)];
      double sy = 0.0, sd = 0.0;
      for (int a = 0; a < spec.na; ++a) {
        const double pz_xa = zi == 1 ? spec.pi[spec.cell(x, a)] : 1.0 - spec.pi[spec.cell(x, a)];
        const double pa_xz = spec.pa[spec.cell(x, a)] * pz_xa / pz_x;
        sy += pa_xz * g_y(z, x, a);
        sd += pa_xz * g_d(z, x, a);
      }
      g_ys[static_cast<std::size_t>(x) * 2 + static_cast<std::size_t>(zi)] = sy;
      g_ds[static_cast<std::size_t>(x) * 2 + static_cast<std::size_t>(zi)] = sd;
    }
  }

  double lambda = 0.0, gamma = 0.0, lambda_s = 0.0, gamma_s = 0.0;
  double v_s2 = 0.0, v2_long = 0.0;
  double alpha_gap_sq = 0.0, gy_gap_sq = 0.0, gd_gap_sq = 0.0;
  double sigma_ys2 = 0.0, sigma_ds2 = 0.0;
  double bias_l = 0.0, bias_g = 0.0, cross_alpha = 0.0, cross_gys = 0.0;
  double var_psi = 0.0;

  for (int x = 0; x < spec.nx; ++x) {
    for (int a = 0; a < spec.na; ++a) {
      const double pxa =
          spec.px[static_cast<std::size_t>(x)] * spec.pa[spec.cell(x, a)];
      for (int zi = 0; zi < 2; ++zi) {
        const double z = zi;
        const double w = pxa * (zi == 1 ? spec.pi[spec.cell(x, a)]
                                        : 1.0 - spec.pi[spec.cell(x, a)]);
        if (w <= 0.0) continue;
        const double al = weight_long(z, x, a);
        const double as = weight_short(z, x);
        const double gy = g_y(z, x, a);
        const double gd = g_d(z, x, a);
        const double gys = g_ys[static_cast<std::size_t>(x) * 2 + static_cast<std::size_t>(zi)];
        const double gds = g_ds[static_cast<std::size_t>(x) * 2 + static_cast<std::size_t>(zi)];

        lambda += w * al * gy;
        gamma += w * al * gd;
        lambda_s += w * as * gy;
        gamma_s += w * as * gd;
        v_s2 += w * as * as;
        v2_long += w * al * al;
        alpha_gap_sq += w * (al - as) * (al - as);
        gy_gap_sq += w * (gy - gys) * (gy - gys);
        gd_gap_sq += w * (gd - gds) * (gd - gds);
        sigma_ys2 += w * ((gy - gys) * (gy - gys) + var_y(z, x, a));
        sigma_ds2 += w * ((gd - gds) * (gd - gds) + gd * (1.0 - gd));
        bias_l += w * (al - as) * (gy - gys);
        bias_g += w * (al - as) * (gd - gds);
        cross_alpha += w * as * (al - as);
        cross_gys += w * gys * (al - as);
      }
    }
  }

  // Population variance of the short lambda score (for sizing consistency
  // checks); the score is alpha_s*(Y - g_Ys) + b with b depending on z, x.
  for (int x = 0; x < spec.nx; ++x) {
    const double delta_y = g_ys[static_cast<std::size_t>(x) * 2 + 1] -
                           g_ys[static_cast<std::size_t>(x) * 2 + 0];
    for (int a = 0; a < spec.na; ++a) {
      const double pxa = spec.px[static_cast<std::size_t>(x)] * spec.pa[spec.cell(x, a)];
      for (int zi = 0; zi < 2; ++zi) {
        const double z = zi;
        const double w = pxa * (zi == 1 ? spec.pi[spec.cell(x, a)]
                                        : 1.0 - spec.pi[spec.cell(x, a)]);
        if (w <= 0.0) continue;
        const double as = weight_short(z, x);
        const double gy = g_y(z, x, a);
        const double gys = g_ys[static_cast<std::size_t>(x) * 2 + static_cast<std::size_t>(zi)];
        const double b = latt ? (z / p_z) * (delta_y - lambda_s) : delta_y - lambda_s;
        var_psi += w * (as * as * ((gy - gys) * (gy - gys) + var_y(z, x, a)) +
                        2.0 * as * b * (gy - gys) + b * b);
      }
    }
  }

  truth.lambda = lambda;
  truth.gamma = gamma;
  truth.lambda_s = lambda_s;
  truth.gamma_s = gamma_s;
  truth.theta = gamma != 0.0 ? lambda / gamma : 0.0;
  truth.v_s2 = v_s2;
  truth.v2_long = v2_long;
  truth.sigma_ys2 = sigma_ys2;
  truth.sigma_ds2 = sigma_ds2;
  truth.alpha_gap_sq = alpha_gap_sq;
  truth.gy_gap_sq = gy_gap_sq;
  truth.gd_gap_sq = gd_gap_sq;
  truth.bias_lambda = bias_l;
  truth.bias_gamma = bias_g;
  truth.mean_alpha_s_cross = cross_alpha;
  truth.mean_g_ys_cross = cross_gys;
  truth.c_alpha = v_s2 > 0.0 ? std::sqrt(alpha_gap_sq / v_s2) : 0.0;
  truth.c_y = sigma_ys2 > 0.0 ? std::sqrt(gy_gap_sq / sigma_ys2) : 0.0;
  truth.c_d = sigma_ds2 > 0.0 ? std::sqrt(gd_gap_sq / sigma_ds2) : 0.0;
  const double denom_y = std::sqrt(alpha_gap_sq * gy_gap_sq);
  truth.rho_y = denom_y > 1e-300 ? bias_l / denom_y : 0.0;
  const double denom_d = std::sqrt(alpha_gap_sq * gd_gap_sq);
  truth.rho_d = denom_d > 1e-300 ? bias_g / denom_d : 0.0;
  truth.var_psi_lambda = var_psi;
  return truth;
}

OracleTruth oracle_plivm(const DgpSpec& spec) {
  OracleTruth truth;
  const double sz2 = spec.sigma_z * spec.sigma_z;

  std::vector<double> l(static_cast<std::size_t>(spec.nx), 0.0);
  std::vector<double> hbar(static_cast<std::size_t>(spec.nx), 0.0);
  std::vector<double> fbar(static_cast<std::size_t>(spec.nx), 0.0);
  for (int x = 0; x < spec.nx; ++x) {
    for (int a = 0; a < spec.na; ++a) {
      const double p = spec.pa[spec.cell(x, a)];
      l[static_cast<std::size_t>(x)] += p * spec.z_mean[spec.cell(x, a)];
      hbar[static_cast<std::size_t>(x)] += p * spec.h_tab[spec.cell(x, a)];
      fbar[static_cast<std::size_t>(x)] += p * spec.f_tab[spec.cell(x, a)];
    }
  }

  double sigma_zs2 = sz2, cov_zh = 0.0, cov_zf = 0.0;
  for (int x = 0; x < spec.nx; ++x) {
    for (int a = 0; a < spec.na; ++a) {
      const double pxa = spec.px[static_cast<std::size_t>(x)] * spec.pa[spec.cell(x, a)];
      const double mu = spec.z_mean[spec.cell(x, a)] - l[static_cast<std::size_t>(x)];
      sigma_zs2 += pxa * mu * mu;
      cov_zh += pxa * mu * spec.h_tab[spec.cell(x, a)];
      cov_zf += pxa * mu * spec.f_tab[spec.cell(x, a)];
    }
  }

  const double theta = spec.theta, gamma = spec.gamma_coef;
  const double lambda = theta * gamma;
  const double gamma_s = gamma + cov_zh / sigma_zs2;
  const double lambda_s = lambda + (theta * cov_zh + cov_zf) / sigma_zs2;
  const double sigma_nu2 = theta * theta * spec.sigma_ud * spec.sigma_ud +
                           spec.sigma_uy * spec.sigma_uy;

  const double a_gy = theta * gamma - lambda_s;
  const double a_gd = gamma - gamma_s;
  const double u = 1.0 / spec.sigma_z - spec.sigma_z / sigma_zs2;

  double gy_gap = 0.0, gd_gap = 0.0, alpha_gap = 0.0;
  double bias_l = 0.0, bias_g = 0.0, cross_alpha = 0.0, cross_gys = 0.0;
  double e_psi1_sq = 0.0;
  for (int x = 0; x < spec.nx; ++x) {
    const double lx = l[static_cast<std::size_t>(x)];
    const double ks = theta * gamma * lx + theta * hbar[static_cast<std::size_t>(x)] +
                      fbar[static_cast<std::size_t>(x)] - lambda_s * lx;
    for (int a = 0; a < spec.na; ++a) {
      const double pxa = spec.px[static_cast<std::size_t>(x)] * spec.pa[spec.cell(x, a)];
      const double mu = spec.z_mean[spec.cell(x, a)] - lx;
      const double c_gy = theta * (spec.h_tab[spec.cell(x, a)] - hbar[static_cast<std::size_t>(x)]) +
                          (spec.f_tab[spec.cell(x, a)] - fbar[static_cast<std::size_t>(x)]);
      const double c_gd = spec.h_tab[spec.cell(x, a)] - hbar[static_cast<std::size_t>(x)];
      const double m2 = mu * mu + sz2;
      const double m3 = mu * mu * mu + 3.0 * mu * sz2;
      const double m4 = mu * mu * mu * mu + 6.0 * mu * mu * sz2 + 3.0 * sz2 * sz2;
      const double wgt = -mu / sigma_zs2;  // constant part of alpha - alpha_s

      gy_gap += pxa * (a_gy * a_gy * m2 + 2.0 * a_gy * c_gy * mu + c_gy * c_gy);
      gd_gap += pxa * (a_gd * a_gd * m2 + 2.0 * a_gd * c_gd * mu + c_gd * c_gd);
      alpha_gap += pxa * (u * u + wgt * wgt);
      bias_l += pxa * (u * a_gy * spec.sigma_z + wgt * (a_gy * mu + c_gy));
      bias_g += pxa * (u * a_gd * spec.sigma_z + wgt * (a_gd * mu + c_gd));
      cross_alpha += pxa * (spec.sigma_z * u + mu * wgt) / sigma_zs2;
      cross_gys += pxa * ((lambda_s * lx + ks) * wgt + lambda_s * (spec.sigma_z * u + mu * wgt));
      e_psi1_sq += pxa * (a_gy * a_gy * m4 + 2.0 * a_gy * c_gy * m3 +
                          (c_gy * c_gy + sigma_nu2) * m2);
    }
  }

  truth.theta = theta;
  truth.lambda = lambda;
  truth.gamma = gamma;
  truth.lambda_s = lambda_s;
  truth.gamma_s = gamma_s;
  truth.v_s2 = 1.0 / sigma_zs2;
  truth.v2_long = 1.0 / sz2;
  truth.sigma_ys2 = gy_gap + sigma_nu2;
  truth.sigma_ds2 = gd_gap + spec.sigma_ud * spec.sigma_ud;
  truth.alpha_gap_sq = alpha_gap;
  truth.gy_gap_sq = gy_gap;
  truth.gd_gap_sq = gd_gap;
  truth.bias_lambda = bias_l;
  truth.bias_gamma = bias_g;
  truth.mean_alpha_s_cross = cross_alpha;
  truth.mean_g_ys_cross = cross_gys;
  truth.c_alpha = std::sqrt(alpha_gap * sigma_zs2);
  truth.c_y = truth.sigma_ys2 > 0.0 ? std::sqrt(gy_gap / truth.sigma_ys2) : 0.0;
  truth.c_d = truth.sigma_ds2 > 0.0 ? std::sqrt(gd_gap / truth.sigma_ds2) : 0.0;
  const double denom_y = std::sqrt(alpha_gap * gy_gap);
  truth.rho_y = denom_y > 1e-300 ? bias_l / denom_y : 0.0;
  const double denom_d = std::sqrt(alpha_gap * gd_gap);
  truth.rho_d = denom_d > 1e-300 ? bias_g / denom_d : 0.0;
  truth.var_psi_lambda = e_psi1_sq / (sigma_zs2 * sigma_zs2);
  return truth;
}

void self_check(const OracleTruth& t) {
  const double scale = std::max({1.0, std::abs(t.lambda), std::abs(t.lambda_s)});
  if (std::abs((t.lambda - t.lambda_s) - t.bias_lambda) > 1e-9 * scale)
    throw std::logic_error("dgp oracle: lambda bias decomposition failed its self-check");
  const double gscale = std::max({1.0, std::abs(t.gamma), std::abs(t.gamma_s)});
  if (std::abs((t.gamma - t.gamma_s) - t.bias_gamma) > 1e-9 * gscale)
    throw std::logic_error("dgp oracle: gamma bias decomposition failed its self-check");
  if (std::abs(t.mean_alpha_s_cross) > 1e-9 * std::max(1.0, t.v_s2))
    throw std::logic_error("dgp oracle: E[alpha_s (alpha - alpha_s)] != 0");
}

}  // namespace

OracleTruth oracle_truth(const DgpSpec& spec) {
  spec.check();
  OracleTruth truth =
      spec.estimand == Estimand::PLIVM ? oracle_plivm(spec) : oracle_binary_iv(spec);
  self_check(truth);
  return truth;
}

DgpSpec default_spec(Estimand estimand, std::size_t n, std::uint64_t seed) {
  DgpSpec spec;
  spec.estimand = estimand;
  spec.nx = 3;
  spec.na = 2;
  spec.px = {0.4, 0.35, 0.25};
  spec.pa = {0.6, 0.4, 0.5, 0.5, 0.3, 0.7};
  spec.n = n;
  spec.seed = seed;

  if (estimand == Estimand::PLIVM) {
    spec.theta = 1.5;
    spec.gamma_coef = 0.8;
    spec.z_mean.resize(6);
    spec.f_tab.resize(6);
    spec.h_tab.resize(6);
    for (int x = 0; x < 3; ++x) {
      for (int a = 0; a < 2; ++a) {
        const std::size_t c = spec.cell(x, a);
        spec.z_mean[c] = -0.4 + 0.3 * x + 0.5 * a;
        spec.h_tab[c] = 0.5 * x + 0.6 * a;
        spec.f_tab[c] = 0.5 + 1.0 * x - 0.8 * a;
      }
    }
    spec.sigma_z = 1.0;
    spec.sigma_uy = 1.0;
    spec.sigma_ud = 0.7;
    return spec;
  }

  spec.pi.resize(6);
  spec.type_probs.resize(6);
  spec.mu.resize(6);
  for (int x = 0; x < 3; ++x) {
    for (int a = 0; a < 2; ++a) {
      const std::size_t c = spec.cell(x, a);
      spec.pi[c] = 0.45 + 0.05 * x + 0.15 * a;
      const double at = 0.15 + 0.05 * a;
      const double nt = 0.20;
      spec.type_probs[c] = {at, nt, 1.0 - at - nt};
      const double base = 1.0 * x + 1.2 * a;
      spec.mu[c] = {1.5 + base, 1.5 + base,          // always takers
                    0.5 + base, 0.5 + base,          // never takers
                    0.8 + base, 2.8 + base + 0.3 * a};  // compliers
    }
  }
  spec.noise_scale = 1.0;
  return spec;
}

DgpSpec jtpa_lookalike(std::size_t n, std::uint64_t seed) {
  DgpSpec spec;
  spec.estimand = Estimand::LATE;
  spec.nx = 6;
  spec.na = 2;
  spec.px = {0.22, 0.20, 0.18, 0.15, 0.15, 0.10};
  spec.pa.resize(12);
  spec.pi.resize(12);
  spec.type_probs.resize(12);
  spec.mu.resize(12);
  for (int x = 0; x < 6; ++x) {
    const double pa1 = 0.30 + 0.06 * x;  // omitted trait more common at higher levels
    spec.pa[spec.cell(x, 0)] = 1.0 - pa1;
    spec.pa[spec.cell(x, 1)] = pa1;
    for (int a = 0; a < 2; ++a) {
      const std::size_t c = spec.cell(x, a);
      spec.pi[c] = 0.62 + 0.012 * x + 0.05 * a;  // offer share near 2/3
      const double at = 0.02;
      const double nt = 0.40 - 0.015 * x - 0.04 * a;
      spec.type_probs[c] = {at, nt, 1.0 - at - nt};
      const double base = 13000.0 + 1500.0 * x + 2600.0 * a;
      const double effect = 1700.0 + 180.0 * a;
      spec.mu[c] = {base + 900.0, base + 900.0, base - 700.0, base - 700.0,
                    base,         base + effect};
    }
  }
  spec.noise_scale = 9000.0;
  spec.n_noise_covariates = 4;
  spec.n = n;
  spec.seed = seed;
  return spec;
}

}  // namespace ovb::sim
