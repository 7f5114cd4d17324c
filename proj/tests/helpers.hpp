#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "ovb/model.hpp"
#include "ovb/rng.hpp"
#include "ovb/simdgp.hpp"

namespace ovbtest {

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool rel_close(double a, double b, double tol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

// ---------------------------------------------------------------------------
// Independent closed-form oracles for the cross-fitting and score tests.
// These work directly on cell tables and never touch the learner or
// crossfit code paths they are used to check.
// ---------------------------------------------------------------------------

using CellKey = std::vector<long long>;

inline CellKey row_key(const ovb::Matrix& x, std::size_t i) {
  CellKey key(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) key[j] = static_cast<long long>(std::llround(x(i, j)));
  return key;
}

// Full-sample plug-in estimate of E[E[V|Z=1,X] - E[V|Z=0,X]] by cell means.
inline double plugin_contrast(const std::vector<double>& v, const std::vector<double>& z,
                              const ovb::Matrix& x) {
  struct Acc {
    double s1 = 0, s0 = 0;
    std::size_t n1 = 0, n0 = 0, n = 0;
  };
  std::map<CellKey, Acc> cells;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Acc& a = cells[row_key(x, i)];
    a.n += 1;
    if (z[i] == 1.0) {
      a.s1 += v[i];
      a.n1 += 1;
    } else {
      a.s0 += v[i];
      a.n0 += 1;
    }
  }
  double out = 0.0;
  for (const auto& [key, a] : cells) {
    if (a.n1 == 0 || a.n0 == 0) throw std::runtime_error("plugin_contrast: one-armed cell");
    out += (static_cast<double>(a.n) / static_cast<double>(v.size())) *
           (a.s1 / a.n1 - a.s0 / a.n0);
  }
  return out;
}

// Pooled cross-fitted AIPW mean for target v, from complement cell means and
// complement cell propensities, by direct arithmetic.
inline double crossfit_aipw_cells(const std::vector<double>& v, const std::vector<double>& z,
                                  const ovb::Matrix& x, const std::vector<int>& folds) {
  struct Acc {
    double s1 = 0, s0 = 0;
    std::size_t n1 = 0, n0 = 0;
  };
  // Totals per cell, then subtract the fold's own contribution.
  std::map<CellKey, Acc> total;
  std::map<std::pair<int, CellKey>, Acc> per_fold;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const CellKey key = row_key(x, i);
    Acc& t = total[key];
    Acc& f = per_fold[{folds[i], key}];
    if (z[i] == 1.0) {
      t.s1 += v[i];
      t.n1 += 1;
      f.s1 += v[i];
      f.n1 += 1;
    } else {
      t.s0 += v[i];
      t.n0 += 1;
      f.s0 += v[i];
      f.n0 += 1;
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const CellKey key = row_key(x, i);
    const Acc& t = total.at(key);
    Acc f;
    const auto it = per_fold.find({folds[i], key});
    if (it != per_fold.end()) f = it->second;
    const double n1 = static_cast<double>(t.n1 - f.n1);
    const double n0 = static_cast<double>(t.n0 - f.n0);
    if (n1 <= 0.0 || n0 <= 0.0) throw std::runtime_error("crossfit_aipw_cells: one-armed cell");
    const double ey1 = (t.s1 - f.s1) / n1;
    const double ey0 = (t.s0 - f.s0) / n0;
    const double pi = std::clamp(n1 / (n1 + n0), 0.01, 0.99);
    sum += z[i] / pi * (v[i] - ey1) - (1.0 - z[i]) / (1.0 - pi) * (v[i] - ey0) + ey1 - ey0;
  }
  return sum / static_cast<double>(n);
}

// Random valid discrete processes for the identity batteries.
inline ovb::sim::DgpSpec random_binary_dgp(ovb::Estimand estimand, std::uint64_t seed) {
  ovb::Rng rng(seed);
  ovb::sim::DgpSpec spec;
  spec.estimand = estimand;
  spec.nx = 2 + static_cast<int>(rng.bounded(2));
  spec.na = 2 + static_cast<int>(rng.bounded(2));
  spec.px.resize(static_cast<std::size_t>(spec.nx));
  double s = 0.0;
  for (auto& p : spec.px) {
    p = 0.2 + rng.uniform();
    s += p;
  }
  for (auto& p : spec.px) p /= s;
  const auto cells = static_cast<std::size_t>(spec.nx * spec.na);
  spec.pa.resize(cells);
  spec.pi.resize(cells);
  spec.type_probs.resize(cells);
  spec.mu.resize(cells);
  for (int x = 0; x < spec.nx; ++x) {
    double sa = 0.0;
    for (int a = 0; a < spec.na; ++a) {
      const double w = 0.2 + rng.uniform();
      spec.pa[spec.cell(x, a)] = w;
      sa += w;
    }
    for (int a = 0; a < spec.na; ++a) spec.pa[spec.cell(x, a)] /= sa;
  }
  for (std::size_t c = 0; c < cells; ++c) {
    spec.pi[c] = 0.15 + 0.7 * rng.uniform();
    const double at = 0.05 + 0.3 * rng.uniform();
    const double nt = 0.05 + 0.3 * rng.uniform();
    spec.type_probs[c] = {at, nt, 1.0 - at - nt};
    for (auto& m : spec.mu[c]) m = -3.0 + 6.0 * rng.uniform();
  }
  spec.noise_scale = 0.3 + rng.uniform();
  spec.n = 400;
  spec.seed = rng.next_u64();
  return spec;
}

inline ovb::sim::DgpSpec random_plivm_dgp(std::uint64_t seed) {
  ovb::Rng rng(seed);
  ovb::sim::DgpSpec spec;
  spec.estimand = ovb::Estimand::PLIVM;
  spec.nx = 2 + static_cast<int>(rng.bounded(2));
  spec.na = 2 + static_cast<int>(rng.bounded(2));
  spec.px.resize(static_cast<std::size_t>(spec.nx));
  double s = 0.0;
  for (auto& p : spec.px) {
    p = 0.2 + rng.uniform();
    s += p;
  }
  for (auto& p : spec.px) p /= s;
  const auto cells = static_cast<std::size_t>(spec.nx * spec.na);
  spec.pa.resize(cells);
  spec.z_mean.resize(cells);
  spec.f_tab.resize(cells);
  spec.h_tab.resize(cells);
  for (int x = 0; x < spec.nx; ++x) {
    double sa = 0.0;
    for (int a = 0; a < spec.na; ++a) {
      const double w = 0.2 + rng.uniform();
      spec.pa[spec.cell(x, a)] = w;
      sa += w;
    }
    for (int a = 0; a < spec.na; ++a) spec.pa[spec.cell(x, a)] /= sa;
  }
  for (std::size_t c = 0; c < cells; ++c) {
    spec.z_mean[c] = -1.0 + 2.0 * rng.uniform();
    spec.f_tab[c] = -2.0 + 4.0 * rng.uniform();
    spec.h_tab[c] = -2.0 + 4.0 * rng.uniform();
  }
  spec.theta = -1.5 + 3.0 * rng.uniform();
  spec.gamma_coef = 0.5 + rng.uniform();
  spec.sigma_z = 0.5 + rng.uniform();
  spec.sigma_uy = 0.3 + rng.uniform();
  spec.sigma_ud = 0.3 + rng.uniform();
  spec.n = 400;
  spec.seed = rng.next_u64();
  return spec;
}

}  // namespace ovbtest
