#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ovb {

enum class Estimand { LATE, LATT, PLIVM };

std::string to_string(Estimand e);
std::optional<Estimand> estimand_from_string(const std::string& s);

// Dense row-major matrix; covariates, learner features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix select_rows(const std::vector<std::size_t>& idx) const;
  Matrix select_cols(const std::vector<std::size_t>& idx) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Estimation input: outcome y, treatment d, instrument z, covariates x.
// For LATE/LATT both d and z are binary; PLIVM allows real d and z.
struct Dataset {
  std::vector<double> y;
  std::vector<double> d;
  std::vector<double> z;
  Matrix x;
  std::vector<std::string> names;  // covariate column labels

  std::size_t n() const { return y.size(); }
  std::optional<std::size_t> column_index(const std::string& name) const;
};

// Returns the full list of invariant violations; empty means valid.
std::vector<std::string> validate(const Dataset& data, Estimand estimand);

using Vec5 = std::array<double, 5>;

// Symmetric 5x5 covariance of the scaled estimator vector
// (lambda_s, gamma_s, v_s^2, sigma_Ys^2, sigma_Ds^2).
struct Mat5 {
  std::array<double, 25> a{};
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * 5 + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * 5 + j]; }

  static Mat5 identity();
  static Mat5 diagonal(const Vec5& d);
  Vec5 multiply(const Vec5& v) const;
  double quad_form(const Vec5& u, const Vec5& v) const;  // u' M v
};

// The five short-version parameters with their joint covariance and the
// per-observation influence contributions they were estimated from.
struct ShortEstimates {
  Estimand estimand = Estimand::LATE;
  double lambda_s = 0.0;
  double gamma_s = 0.0;
  double v_s2 = 0.0;
  double sigma_ys2 = 0.0;
  double sigma_ds2 = 0.0;
  Mat5 omega;              // covariance of sqrt(n) * (estimates - truth)
  std::size_t n = 0;
  std::vector<Vec5> scores;  // n x 5 influence contributions; omega = mean of outer products

  Vec5 params() const { return {lambda_s, gamma_s, v_s2, sigma_ys2, sigma_ds2}; }
  bool theta_defined() const { return std::abs(gamma_s) > 1e-12; }
  double theta_s() const { return lambda_s / gamma_s; }
  double se(int param) const;  // standard error sqrt(omega(p,p)/n)
};

// Calibrated strength of the omitted variable. zeta accessors give the
// products entering the bound half-widths.
struct SensitivityConfig {
  double c_alpha = 0.0;
  double c_y = 0.0;
  double c_d = 0.0;
  double rho_y_abs = 1.0;
  double rho_d_abs = 1.0;

  double zeta_y() const { return rho_y_abs * c_y * c_alpha; }
  double zeta_d() const { return rho_d_abs * c_d * c_alpha; }
  std::vector<std::string> validate() const;
};

enum class ThetaSetKind { Interval, UnionOfRays, WholeLine, FirstStageFailure };

// Identification set for theta0. Interval: [lo, hi]. UnionOfRays:
// (-inf, lo] U [hi, inf) with lo < hi. The failure flag travels alongside the
// raw set; FirstStageFailure as a kind means the raw bounds are undefined
// (a gamma endpoint at zero).
struct ThetaSet {
  ThetaSetKind kind = ThetaSetKind::Interval;
  double lo = 0.0;
  double hi = 0.0;
  bool first_stage_failure = false;
  int theorem_case = 0;  // 1: gamma bounds positive, 2: negative, 3: mixed sign
};

struct BoundSet {
  double lambda_lo = 0.0, lambda_hi = 0.0;
  double gamma_lo = 0.0, gamma_hi = 0.0;
  ThetaSet theta_set;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct StoyeResult {
  bool empty = false;
  Interval ci;
  double z_l_star = 0.0;
  double z_u_star = 0.0;
  double delta_star = 0.0;
  double min_objective = 0.0;
  double rho_hat = 0.0;
  bool degenerate_variance = false;
};

struct ThetaCiResult {
  bool empty = false;
  Interval ci;
  bool unbounded_below = false;
  bool unbounded_above = false;
};

struct PhiCurveRow {
  double t = 0.0;
  double phi_lo = 0.0, phi_hi = 0.0;
  double se_lo = 0.0, se_hi = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
};

struct CIReport {
  double tau = 0.025;
  Interval lambda_ci, gamma_ci;                    // one-sided bound CIs combined
  Interval lambda_conventional, gamma_conventional;  // zeta = 0 reference
  ThetaCiResult theta0_ci;
  ThetaCiResult theta0_conventional;
  StoyeResult stoye_lambda, stoye_gamma, stoye_theta;
  ThetaCiResult stoye_theta_ci;
  std::vector<PhiCurveRow> phi_curve;
};

// CSV interchange. Header row required on load; columns y, d, z are bound by
// name and every remaining column is a covariate. Values are written with 17
// significant digits so a load/save cycle is bit-exact.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

std::string format_double(double v);  // 17 significant digits

struct CovariateGroup {
  std::string name;
  std::vector<std::string> columns;
};

// Group-definition file: one `group_name: col1,col2,...` per line; '#' starts
// a comment.
std::vector<CovariateGroup> parse_group_file(const std::string& path);
std::vector<CovariateGroup> parse_group_text(const std::string& text);

}  // namespace ovb
