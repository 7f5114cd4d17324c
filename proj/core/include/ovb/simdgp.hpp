#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ovb/model.hpp"

namespace ovb::sim {

// Finite-support data generating process with a fully observed omitted
// variable A, so every population quantity is exactly enumerable. The
// covariate handed to estimators is the discrete X (emitted as dummy
// columns); A is withheld but returned alongside.
//
// LATE/LATT: draw x ~ px, a | x ~ pa, z | (x,a) ~ Bernoulli(pi),
// type | (x,a) ~ (always-taker, never-taker, complier), d = d(type, z),
// y = mu(type, z | x, a) + noise_scale * N(0,1).
//
// PLIVM: z = z_mean(x,a) + sigma_z * N(0,1), d = gamma_coef * z + h(x,a) +
// sigma_ud * N(0,1), y = theta * d + f(x,a) + sigma_uy * N(0,1).
struct DgpSpec {
  Estimand estimand = Estimand::LATE;
  int nx = 2;
  int na = 2;
  std::vector<double> px;                       // nx
  std::vector<double> pa;                       // nx*na, rows sum to 1
  std::vector<double> pi;                       // nx*na, in (0,1)
  std::vector<std::array<double, 3>> type_probs;  // per cell: AT, NT, C
  std::vector<std::array<double, 6>> mu;          // per cell: [type*2 + z]
  double noise_scale = 1.0;

  double theta = 0.0;
  double gamma_coef = 0.0;
  std::vector<double> z_mean, f_tab, h_tab;  // nx*na
  double sigma_z = 1.0, sigma_uy = 1.0, sigma_ud = 1.0;

  int n_noise_covariates = 0;  // extra Bernoulli(1/2) columns independent of everything
  std::size_t n = 0;
  std::uint64_t seed = 0;

  std::size_t cell(int x, int a) const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(na) +
           static_cast<std::size_t>(a);
  }
  void check() const;  // throws on invalid tables
};

struct GeneratedData {
  Dataset data;
  std::vector<int> x_level;  // the underlying discrete level per row
  std::vector<int> a_level;  // withheld omitted variable per row
};

GeneratedData generate(const DgpSpec& spec);

// Exact population quantities by enumeration over the joint support, with the
// bias decomposition computed two independent ways as an internal self-check.
struct OracleTruth {
  double theta = 0.0;
  double lambda = 0.0, gamma = 0.0;      // long versions
  double lambda_s = 0.0, gamma_s = 0.0;  // short versions
  double v_s2 = 0.0, sigma_ys2 = 0.0, sigma_ds2 = 0.0;
  double v2_long = 0.0;  // E[alpha^2]
  double c_alpha = 0.0, c_y = 0.0, c_d = 0.0;
  double rho_y = 0.0, rho_d = 0.0;
  double bias_lambda = 0.0, bias_gamma = 0.0;  // E[(alpha-alpha_s)(g - g_s)]
  double var_psi_lambda = 0.0;  // population variance of the short lambda score
  double mean_alpha_s_cross = 0.0;   // E[alpha_s (alpha - alpha_s)]
  double mean_g_ys_cross = 0.0;      // E[g_Ys (alpha - alpha_s)]
  double alpha_gap_sq = 0.0;         // E[(alpha - alpha_s)^2]
  double gy_gap_sq = 0.0;            // E[(g_Y - g_Ys)^2]
  double gd_gap_sq = 0.0;            // E[(g_D - g_Ds)^2]

  SensitivityConfig config() const {
    SensitivityConfig cfg;
    cfg.c_alpha = c_alpha;
    cfg.c_y = c_y;
    cfg.c_d = c_d;
    cfg.rho_y_abs = rho_y < 0.0 ? -rho_y : rho_y;
    cfg.rho_d_abs = rho_d < 0.0 ? -rho_d : rho_d;
    return cfg;
  }
};

OracleTruth oracle_truth(const DgpSpec& spec);

// Ready-made specs.
DgpSpec default_spec(Estimand estimand, std::size_t n, std::uint64_t seed);
DgpSpec jtpa_lookalike(std::size_t n, std::uint64_t seed);  // earnings-scale LATE process

}  // namespace ovb::sim
