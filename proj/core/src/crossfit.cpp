#include "ovb/crossfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ovb/rng.hpp"

namespace ovb {

FoldPlan assign_folds(std::size_t n, int k_folds, std::uint64_t seed) {
  if (k_folds < 2 || static_cast<std::size_t>(k_folds) * 2 > n)
    throw std::invalid_argument("assign_folds: K must satisfy 2 <= K <= n/2 (K=" +
                                std::to_string(k_folds) + ", n=" + std::to_string(n) + ")");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);

  FoldPlan plan;
  plan.k_folds = k_folds;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  const std::size_t base = n / static_cast<std::size_t>(k_folds);
  const std::size_t extra = n % static_cast<std::size_t>(k_folds);
  std::size_t pos = 0;
  for (int k = 0; k < k_folds; ++k) {
    const std::size_t size = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) plan.assignments[perm[pos++]] = k;
  }
  return plan;
}

namespace {

std::vector<std::size_t> which(const std::vector<int>& assignments, int fold, bool complement) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if ((assignments[i] == fold) != complement) idx.push_back(i);
  return idx;
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

// Nuisance predictions for every observation, each taken from the model fit
// on its fold's complement.
std::vector<NuisanceRow> crossfit_nuisances(const Dataset& data, Estimand estimand,
                                            const LearnerSpec& spec, const FoldPlan& plan,
                                            int workers) {
  const std::size_t n = data.n();
  std::vector<NuisanceRow> nv(n);
  const double p_z =
      std::accumulate(data.z.begin(), data.z.end(), 0.0) / static_cast<double>(n);

  for (int k = 0; k < plan.k_folds; ++k) {
    const auto train = which(plan.assignments, k, true);
    const auto test = which(plan.assignments, k, false);
    const Matrix x_train = data.x.select_rows(train);
    const Matrix x_test = data.x.select_rows(test);

    if (estimand == Estimand::PLIVM) {
      LearnerSpec s = spec;
      s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 1);
      auto fit_m = fit_learner(s, x_train, gather(data.y, train), TargetKind::Mean, workers);
      s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 2);
      auto fit_r = fit_learner(s, x_train, gather(data.d, train), TargetKind::Mean, workers);
      s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 3);
      auto fit_l = fit_learner(s, x_train, gather(data.z, train), TargetKind::Mean, workers);
      const auto pm = fit_m.predict(x_test);
      const auto pr = fit_r.predict(x_test);
      const auto pl = fit_l.predict(x_test);
      for (std::size_t i = 0; i < test.size(); ++i) {
        nv[test[i]].m = pm[i];
        nv[test[i]].r = pr[i];
        nv[test[i]].l = pl[i];
      }
      continue;
    }

    std::vector<std::size_t> arm1, arm0;
    for (std::size_t i : train) (data.z[i] == 1.0 ? arm1 : arm0).push_back(i);
    for (int arm = 0; arm <= 1; ++arm) {
      const std::size_t count = arm ? arm1.size() : arm0.size();
      if (count < 2)
        throw std::runtime_error("crossfit: training complement of fold " + std::to_string(k) +
                                 (count == 0 ? " has no z=" : " has only one z=") +
                                 std::to_string(arm) + " observations");
    }

    LearnerSpec s = spec;
    s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 1);
    auto fit_pi = fit_learner(s, x_train, gather(data.z, train), TargetKind::Probability, workers);
    const Matrix x1 = data.x.select_rows(arm1);
    const Matrix x0 = data.x.select_rows(arm0);
    s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 2);
    auto fit_ey1 = fit_learner(s, x1, gather(data.y, arm1), TargetKind::Mean, workers);
    s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 3);
    auto fit_ey0 = fit_learner(s, x0, gather(data.y, arm0), TargetKind::Mean, workers);
    s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 4);
    auto fit_ed1 = fit_learner(s, x1, gather(data.d, arm1), TargetKind::Mean, workers);
    s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k) * 8 + 5);
    auto fit_ed0 = fit_learner(s, x0, gather(data.d, arm0), TargetKind::Mean, workers);

    const auto ppi = fit_pi.predict(x_test);
    const auto pey1 = fit_ey1.predict(x_test);
    const auto pey0 = fit_ey0.predict(x_test);
    const auto ped1 = fit_ed1.predict(x_test);
    const auto ped0 = fit_ed0.predict(x_test);
    for (std::size_t i = 0; i < test.size(); ++i) {
      NuisanceRow& row = nv[test[i]];
      row.pi = ppi[i];
      row.ey1 = pey1[i];
      row.ey0 = pey0[i];
      row.ed1 = ped1[i];
      row.ed0 = ped0[i];
      row.p_z = p_z;
    }
  }
  return nv;
}

Mat5 outer_mean(const std::vector<Vec5>& rows) {
  Mat5 m;
  for (const auto& r : rows)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        m(i, j) += r[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(j)];
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& v : m.a) v *= inv;
  return m;
}

}  // namespace

CrossfitResult crossfit_estimate(const Dataset& data, Estimand estimand, const LearnerSpec& spec,
                                 const FoldPlan& plan, int workers) {
  const std::size_t n = data.n();
  if (plan.assignments.size() != n)
    throw std::invalid_argument("crossfit: fold plan size does not match dataset");
  {
    const auto errors = validate(data, estimand);
    if (!errors.empty()) throw std::invalid_argument("crossfit: invalid dataset: " + errors[0]);
  }

  const auto nv = crossfit_nuisances(data, estimand, spec, plan, workers);

  std::vector<ScoreRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (estimand) {
      case Estimand::LATE: rows[i] = late_score_row(data.y[i], data.d[i], data.z[i], nv[i]); break;
      case Estimand::LATT: rows[i] = latt_score_row(data.y[i], data.d[i], data.z[i], nv[i]); break;
      case Estimand::PLIVM:
        rows[i] = plivm_score_row(data.y[i], data.d[i], data.z[i], nv[i]);
        break;
    }
  }

  double mean_sl = 0.0, mean_sg = 0.0, mean_sa = 0.0;
  for (const auto& r : rows) {
    mean_sl += r.s_lambda;
    mean_sg += r.s_gamma;
    mean_sa += r.s_alpha2;
  }
  const double dn = static_cast<double>(n);
  mean_sl /= dn;
  mean_sg /= dn;
  mean_sa /= dn;

  CrossfitResult result;
  ShortEstimates& est = result.est;
  est.estimand = estimand;
  est.n = n;
  est.scores.resize(n);

  if (estimand == Estimand::PLIVM) {
    if (!(mean_sa > 0.0))
      throw std::runtime_error("crossfit: degenerate instrument residual, E[(Z-l)^2] = 0");
    est.lambda_s = mean_sl / mean_sa;
    est.gamma_s = mean_sg / mean_sa;
    est.v_s2 = 1.0 / mean_sa;
    double sy = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double zr = data.z[i] - nv[i].l;
      const double ry = (data.y[i] - nv[i].m) - est.lambda_s * zr;
      const double rd = (data.d[i] - nv[i].r) - est.gamma_s * zr;
      rows[i].s_ry2 = ry * ry;
      rows[i].s_rd2 = rd * rd;
      sy += rows[i].s_ry2;
      sd += rows[i].s_rd2;
    }
    est.sigma_ys2 = sy / dn;
    est.sigma_ds2 = sd / dn;
    // Influence contributions -J^{-1} psi with J from plivm_jacobian.
    for (std::size_t i = 0; i < n; ++i) {
      const ScoreRow& r = rows[i];
      const double psi1 = r.s_lambda - est.lambda_s * r.s_alpha2;
      const double psi2 = r.s_gamma - est.gamma_s * r.s_alpha2;
      const double psi3 = r.s_alpha2 / (mean_sa * mean_sa) - est.v_s2;
      est.scores[i] = {psi1 / mean_sa, psi2 / mean_sa, psi3, r.s_ry2 - est.sigma_ys2,
                       r.s_rd2 - est.sigma_ds2};
    }
  } else {
    est.lambda_s = mean_sl;
    est.gamma_s = mean_sg;
    est.v_s2 = mean_sa;
    double sy = 0.0, sd = 0.0;
    for (const auto& r : rows) {
      sy += r.s_ry2;
      sd += r.s_rd2;
    }
    est.sigma_ys2 = sy / dn;
    est.sigma_ds2 = sd / dn;
    const double p_z = nv.empty() ? 0.5 : nv[0].p_z;
    for (std::size_t i = 0; i < n; ++i) {
      const ScoreRow& r = rows[i];
      double psi1, psi2;
      if (estimand == Estimand::LATT) {
        psi1 = r.s_lambda - data.z[i] * est.lambda_s / p_z;
        psi2 = r.s_gamma - data.z[i] * est.gamma_s / p_z;
      } else {
        psi1 = r.s_lambda - est.lambda_s;
        psi2 = r.s_gamma - est.gamma_s;
      }
      est.scores[i] = {psi1, psi2, r.s_alpha2 - est.v_s2, r.s_ry2 - est.sigma_ys2,
                       r.s_rd2 - est.sigma_ds2};
    }
  }
  est.omega = outer_mean(est.scores);

  // Per-fold diagnostics and the DML1 ratio estimate.
  result.fold_lambda.assign(static_cast<std::size_t>(plan.k_folds), 0.0);
  result.fold_gamma.assign(static_cast<std::size_t>(plan.k_folds), 0.0);
  std::vector<double> fold_alpha(static_cast<std::size_t>(plan.k_folds), 0.0);
  std::vector<std::size_t> fold_n(static_cast<std::size_t>(plan.k_folds), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(plan.assignments[i]);
    result.fold_lambda[k] += rows[i].s_lambda;
    result.fold_gamma[k] += rows[i].s_gamma;
    fold_alpha[k] += rows[i].s_alpha2;
    fold_n[k] += 1;
  }
  double dml1 = 0.0;
  bool dml1_ok = true;
  for (std::size_t k = 0; k < result.fold_lambda.size(); ++k) {
    const double fn = static_cast<double>(fold_n[k]);
    result.fold_lambda[k] /= fn;
    result.fold_gamma[k] /= fn;
    fold_alpha[k] /= fn;
    double fl = result.fold_lambda[k], fg = result.fold_gamma[k];
    if (estimand == Estimand::PLIVM && fold_alpha[k] > 0.0) {
      fl /= fold_alpha[k];
      fg /= fold_alpha[k];
    }
    if (std::abs(fg) > 1e-12)
      dml1 += fl / fg;
    else
      dml1_ok = false;
  }
  if (dml1_ok) {
    result.theta_dml1 = dml1 / static_cast<double>(plan.k_folds);
    result.theta_dml1_defined = true;
  }
  return result;
}

CrossfitResult crossfit_estimate(const Dataset& data, Estimand estimand, const LearnerSpec& spec,
                                 int k_folds, std::uint64_t seed, int workers) {
  return crossfit_estimate(data, estimand, spec, assign_folds(data.n(), k_folds, seed), workers);
}

namespace {

double operator_norm(const Mat5& m) {
  Eigen::Matrix<double, 5, 5> e;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) e(i, j) = m(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> solver(e);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

CrossfitResult median_aggregate(const std::vector<CrossfitResult>& results) {
  if (results.empty()) throw std::invalid_argument("median_aggregate: empty input");
  const std::size_t len = results.size();
  if (len == 1) return results[0];

  Vec5 med{};
  for (int p = 0; p < 5; ++p) {
    std::vector<double> vals(len);
    for (std::size_t l = 0; l < len; ++l) vals[l] = results[l].est.params()[static_cast<std::size_t>(p)];
    std::sort(vals.begin(), vals.end());
    med[static_cast<std::size_t>(p)] = vals[(len - 1) / 2];  // lower median
  }

  // Inflate each covariance by the dispersion of its parameter vector around
  // the median, then keep the matrix with the (lower) median operator norm.
  std::vector<Mat5> adjusted(len);
  std::vector<std::pair<double, std::size_t>> norms(len);
  for (std::size_t l = 0; l < len; ++l) {
    Mat5 m = results[l].est.omega;
    const Vec5 p = results[l].est.params();
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        m(i, j) += (p[static_cast<std::size_t>(i)] - med[static_cast<std::size_t>(i)]) *
                   (p[static_cast<std::size_t>(j)] - med[static_cast<std::size_t>(j)]);
    adjusted[l] = m;
    norms[l] = {operator_norm(m), l};
  }
  std::sort(norms.begin(), norms.end());
  const std::size_t chosen = norms[(len - 1) / 2].second;

  CrossfitResult out = results[chosen];
  out.est.lambda_s = med[0];
  out.est.gamma_s = med[1];
  out.est.v_s2 = med[2];
  out.est.sigma_ys2 = med[3];
  out.est.sigma_ds2 = med[4];
  out.est.omega = adjusted[chosen];
  return out;
}

CrossfitResult median_crossfit(const Dataset& data, Estimand estimand, const LearnerSpec& spec,
                               int k_folds, int replications, std::uint64_t seed, int workers) {
  if (replications < 1) throw std::invalid_argument("median_crossfit: L must be >= 1");
  std::vector<CrossfitResult> results(static_cast<std::size_t>(replications));
  for (std::size_t l = 0; l < results.size(); ++l) {
    LearnerSpec s = spec;
    s.seed = derive_seed(seed, 2 * l + 1);
    results[l] = crossfit_estimate(data, estimand, s, k_folds, derive_seed(seed, 2 * l), workers);
  }
  return median_aggregate(results);
}

}  // namespace ovb
