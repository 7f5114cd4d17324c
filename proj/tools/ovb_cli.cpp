// Command-line front end: estimation, OVB bounds, confidence intervals,
// sensitivity contours, benchmarking and simulation, with file outputs and a
// reproducibility manifest per run.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "ovb/crossfit.hpp"
#include "ovb/identify.hpp"
#include "ovb/inference.hpp"
#include "ovb/learners.hpp"
#include "ovb/model.hpp"
#include "ovb/parallel.hpp"
#include "ovb/rng.hpp"
#include "ovb/runconfig.hpp"
#include "ovb/sensitivity.hpp"
#include "ovb/simdgp.hpp"
#include "ovb/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ovb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitFirstStage = 3;
constexpr int kExitSolver = 4;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_manifest(const RunConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["seed"] = cfg.seed;
  m["config_hash"] = fnv1a_hash(cfg.resolved_text());
  m["data"] = cfg.data_path;
  m["data_hash"] = cfg.data_path.empty() ? 0 : hash_file(cfg.data_path);
  m["workers_note"] = "results are independent of the worker count";
  write_json(fs::path(cfg.out_dir) / "manifest.json", m);
}

json interval_json(const Interval& iv) { return json{{"lo", iv.lo}, {"hi", iv.hi}}; }

json theta_ci_json(const ThetaCiResult& r) {
  json j;
  j["empty"] = r.empty;
  if (!r.empty) {
    j["lo"] = r.ci.lo;
    j["hi"] = r.ci.hi;
    j["unbounded_below"] = r.unbounded_below;
    j["unbounded_above"] = r.unbounded_above;
  }
  return j;
}

json stoye_json(const StoyeResult& s) {
  json j;
  j["empty"] = s.empty;
  if (!s.empty) j["ci"] = interval_json(s.ci);
  j["z_l_star"] = s.z_l_star;
  j["z_u_star"] = s.z_u_star;
  j["delta_star"] = s.delta_star;
  j["min_objective"] = s.min_objective;
  j["rho_hat"] = s.rho_hat;
  j["degenerate_variance"] = s.degenerate_variance;
  return j;
}

std::string theta_set_label(const ThetaSet& set) {
  switch (set.kind) {
    case ThetaSetKind::Interval: return "interval";
    case ThetaSetKind::UnionOfRays: return "union_of_rays";
    case ThetaSetKind::WholeLine: return "whole_line";
    case ThetaSetKind::FirstStageFailure: return "first_stage_failure";
  }
  return "interval";
}

json theta_set_json(const ThetaSet& set) {
  json j;
  j["kind"] = theta_set_label(set);
  j["first_stage_failure"] = set.first_stage_failure;
  j["theorem_case"] = set.theorem_case;
  if (set.kind == ThetaSetKind::Interval) {
    j["lo"] = set.lo;
    j["hi"] = set.hi;
  } else if (set.kind == ThetaSetKind::UnionOfRays) {
    j["left_ray_hi"] = set.lo;
    j["right_ray_lo"] = set.hi;
  }
  return j;
}

json estimates_json(const ShortEstimates& est, const RunConfig& cfg) {
  json j;
  j["estimand"] = to_string(est.estimand);
  j["n"] = est.n;
  j["k_folds"] = cfg.k_folds;
  j["replications"] = cfg.replications;
  j["seed"] = cfg.seed;
  j["lambda_s"] = est.lambda_s;
  j["gamma_s"] = est.gamma_s;
  j["v_s2"] = est.v_s2;
  j["sigma_ys2"] = est.sigma_ys2;
  j["sigma_ds2"] = est.sigma_ds2;
  j["se_lambda_s"] = est.se(0);
  j["se_gamma_s"] = est.se(1);
  j["theta_defined"] = est.theta_defined();
  if (est.theta_defined()) {
    j["theta_s"] = est.theta_s();
    // Delta-method standard error for the ratio.
    const Vec5 grad{1.0 / est.gamma_s, -est.lambda_s / (est.gamma_s * est.gamma_s), 0, 0, 0};
    const double var = est.omega.quad_form(grad, grad) / static_cast<double>(est.n);
    const double se = var > 0.0 ? std::sqrt(var) : 0.0;
    j["se_theta_s"] = se;
    const double zq = normal_quantile(1.0 - cfg.tau);
    j["theta_ci"] = json{{"lo", est.theta_s() - zq * se}, {"hi", est.theta_s() + zq * se}};
  }
  json omega = json::array();
  for (int i = 0; i < 5; ++i) {
    json row = json::array();
    for (int k = 0; k < 5; ++k) row.push_back(est.omega(i, k));
    omega.push_back(row);
  }
  j["omega"] = omega;
  return j;
}

ShortEstimates estimates_from_json(const json& j) {
  ShortEstimates est;
  const auto e = estimand_from_string(j.at("estimand").get<std::string>());
  if (!e) throw InputError("estimates file: unknown estimand");
  est.estimand = *e;
  est.n = j.at("n").get<std::size_t>();
  est.lambda_s = j.at("lambda_s").get<double>();
  est.gamma_s = j.at("gamma_s").get<double>();
  est.v_s2 = j.at("v_s2").get<double>();
  est.sigma_ys2 = j.at("sigma_ys2").get<double>();
  est.sigma_ds2 = j.at("sigma_ds2").get<double>();
  const auto& omega = j.at("omega");
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 5; ++k) est.omega(i, k) = omega.at(i).at(k).get<double>();
  return est;
}

Dataset load_and_validate(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw InputError("no input data; pass --data or set [run] data");
  Dataset data = load_csv(cfg.data_path);
  const auto errors = validate(data, cfg.estimand);
  if (!errors.empty()) {
    std::string msg = "invalid dataset:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw InputError(msg);
  }
  return data;
}

ShortEstimates run_estimation(const RunConfig& cfg, const Dataset& data) {
  LearnerSpec spec = cfg.learner;
  const CrossfitResult result = median_crossfit(data, cfg.estimand, spec, cfg.k_folds,
                                                cfg.replications, cfg.seed, cfg.workers);
  return result.est;
}

ShortEstimates obtain_estimates(const RunConfig& cfg) {
  if (!cfg.estimates_path.empty()) {
    std::ifstream in(cfg.estimates_path);
    if (!in) throw InputError("cannot open estimates file '" + cfg.estimates_path + "'");
    json j;
    in >> j;
    return estimates_from_json(j);
  }
  return run_estimation(cfg, load_and_validate(cfg));
}

// Calibrated sensitivity values: direct config values, or the maximum
// benchmark estimate over the provided covariate groups.
SensitivityConfig resolve_sensitivity(const RunConfig& cfg, json* benchmark_out) {
  if (!cfg.calibrate_benchmark) return cfg.sensitivity;
  if (cfg.groups_path.empty())
    throw InputError("calibrate=benchmark requires a group-definition file ([sensitivity] groups)");
  const Dataset data = load_and_validate(cfg);
  const auto groups = parse_group_file(cfg.groups_path);
  if (groups.empty()) throw InputError("group file defines no groups");
  std::vector<BenchmarkResult> results;
  json rows = json::array();
  for (const auto& g : groups) {
    BenchmarkResult r = benchmark_calibrate(data, cfg.estimand, g, cfg.k_alpha, cfg.k_y, cfg.k_d,
                                            cfg.learner, cfg.k_folds, cfg.seed, cfg.workers);
    json row;
    row["group"] = r.group;
    row["g_alpha"] = r.g_alpha;
    row["g_y"] = r.g_y;
    row["g_d"] = r.g_d;
    row["c_alpha"] = r.c_alpha_defined ? json(r.c_alpha) : json();
    row["c_y"] = r.c_y;
    row["c_d"] = r.c_d;
    row["r2_alpha_drop"] = r.r2_alpha_drop;
    row["r2_y_drop"] = r.r2_y_drop;
    row["r2_d_drop"] = r.r2_d_drop;
    if (!r.error.empty()) row["error"] = r.error;
    if (!r.warning.empty()) row["warning"] = r.warning;
    rows.push_back(row);
    results.push_back(std::move(r));
  }
  const BenchmarkMax mx = benchmark_max(results);
  if (benchmark_out) {
    (*benchmark_out)["groups"] = rows;
    (*benchmark_out)["max"] = json{{"c_alpha", mx.c_alpha},       {"group_alpha", mx.group_alpha},
                                   {"c_y", mx.c_y},               {"group_y", mx.group_y},
                                   {"c_d", mx.c_d},               {"group_d", mx.group_d},
                                   {"k_alpha", cfg.k_alpha},      {"k_y", cfg.k_y},
                                   {"k_d", cfg.k_d}};
  }
  SensitivityConfig out = cfg.sensitivity;
  out.c_alpha = mx.c_alpha;
  out.c_y = mx.c_y;
  out.c_d = mx.c_d;
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string interval_text(const Interval& iv) {
  return "[" + fmt(iv.lo) + ", " + fmt(iv.hi) + "]";
}

std::string theta_set_text(const ThetaSet& set) {
  switch (set.kind) {
    case ThetaSetKind::Interval:
      return "[" + fmt(set.lo) + ", " + fmt(set.hi) + "]";
    case ThetaSetKind::UnionOfRays:
      return "(-inf, " + fmt(set.lo) + "] U [" + fmt(set.hi) + ", inf)";
    case ThetaSetKind::WholeLine: return "(-inf, inf)";
    case ThetaSetKind::FirstStageFailure: return "undefined (gamma bound at zero)";
  }
  return "";
}

int cmd_estimate(const RunConfig& cfg) {
  const Dataset data = load_and_validate(cfg);
  const ShortEstimates est = run_estimation(cfg, data);
  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, "estimate");
  const json j = estimates_json(est, cfg);
  write_json(fs::path(cfg.out_dir) / "estimate.json", j);

  std::ostringstream os;
  os << "short estimates (" << to_string(cfg.estimand) << ", n=" << est.n
     << ", K=" << cfg.k_folds << ", L=" << cfg.replications << ")\n"
     << "  lambda_s  " << fmt(est.lambda_s) << "  (se " << fmt(est.se(0)) << ")\n"
     << "  gamma_s   " << fmt(est.gamma_s) << "  (se " << fmt(est.se(1)) << ")\n";
  if (est.theta_defined()) {
    os << "  theta_s   " << fmt(est.theta_s()) << "  (se " << fmt(j.at("se_theta_s").get<double>())
       << ", " << fmt(100 * (1 - 2 * cfg.tau)) << "% CI "
       << interval_text({j.at("theta_ci").at("lo").get<double>(),
                         j.at("theta_ci").at("hi").get<double>()})
       << ")\n";
  } else {
    os << "  theta_s   undefined (|gamma_s| < 1e-12)\n";
  }
  os << "  v_s2      " << fmt(est.v_s2) << "\n  sigma_Ys2 " << fmt(est.sigma_ys2)
     << "\n  sigma_Ds2 " << fmt(est.sigma_ds2) << "\n";
  write_text(fs::path(cfg.out_dir) / "estimate.txt", os.str());
  std::cout << os.str();
  return kExitOk;
}

int cmd_bounds(const RunConfig& cfg) {
  const ShortEstimates est = obtain_estimates(cfg);
  json benchmark;
  const SensitivityConfig sens = resolve_sensitivity(cfg, &benchmark);
  const BoundSet bounds = ovb_bound_set(est, sens);

  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, "bounds");
  json j;
  j["estimand"] = to_string(est.estimand);
  j["sensitivity"] = json{{"c_alpha", sens.c_alpha}, {"c_y", sens.c_y},       {"c_d", sens.c_d},
                          {"rho_y", sens.rho_y_abs}, {"rho_d", sens.rho_d_abs}};
  j["lambda"] = json{{"estimate", est.lambda_s}, {"lo", bounds.lambda_lo}, {"hi", bounds.lambda_hi}};
  j["gamma"] = json{{"estimate", est.gamma_s}, {"lo", bounds.gamma_lo}, {"hi", bounds.gamma_hi}};
  j["theta"] = theta_set_json(bounds.theta_set);
  if (!benchmark.is_null()) j["benchmark"] = benchmark;
  write_json(fs::path(cfg.out_dir) / "bounds.json", j);

  std::ostringstream os;
  os << "OVB bounds (" << to_string(est.estimand) << ")\n"
     << "  lambda  est " << fmt(est.lambda_s) << "  bounds [" << fmt(bounds.lambda_lo) << ", "
     << fmt(bounds.lambda_hi) << "]\n"
     << "  gamma   est " << fmt(est.gamma_s) << "  bounds [" << fmt(bounds.gamma_lo) << ", "
     << fmt(bounds.gamma_hi) << "]\n"
     << "  theta0  " << theta_set_text(bounds.theta_set) << "  (case "
     << bounds.theta_set.theorem_case << ")\n";
  if (bounds.theta_set.first_stage_failure)
    os << "  first-stage failure: the gamma bound interval touches zero; stopping here is "
          "recommended\n";
  write_text(fs::path(cfg.out_dir) / "bounds.txt", os.str());
  std::cout << os.str();
  return bounds.theta_set.first_stage_failure ? kExitFirstStage : kExitOk;
}

int cmd_ci(const RunConfig& cfg) {
  const ShortEstimates est = obtain_estimates(cfg);
  json benchmark;
  const SensitivityConfig sens = resolve_sensitivity(cfg, &benchmark);
  const BoundSet bounds = ovb_bound_set(est, sens);

  ReportOptions opts;
  opts.tau = cfg.tau;
  opts.stoye_tau = cfg.stoye_tau;
  opts.t_resolution = cfg.t_points;
  opts.phi_curve_points = cfg.phi_points;
  if (cfg.t_range_set) opts.t_range = TRange{cfg.t_lo, cfg.t_hi};
  const CIReport report = build_ci_report(est, sens, opts);

  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, "ci");
  json j;
  j["estimand"] = to_string(est.estimand);
  j["tau"] = report.tau;
  j["stoye_tau"] = cfg.stoye_tau;
  j["sensitivity"] = json{{"c_alpha", sens.c_alpha}, {"c_y", sens.c_y},       {"c_d", sens.c_d},
                          {"rho_y", sens.rho_y_abs}, {"rho_d", sens.rho_d_abs}};
  j["lambda"] = json{{"estimate", est.lambda_s},
                     {"conventional_ci", interval_json(report.lambda_conventional)},
                     {"bounds", json{{"lo", bounds.lambda_lo}, {"hi", bounds.lambda_hi}}},
                     {"ovb_ci", interval_json(report.lambda_ci)},
                     {"stoye", stoye_json(report.stoye_lambda)}};
  j["gamma"] = json{{"estimate", est.gamma_s},
                    {"conventional_ci", interval_json(report.gamma_conventional)},
                    {"bounds", json{{"lo", bounds.gamma_lo}, {"hi", bounds.gamma_hi}}},
                    {"ovb_ci", interval_json(report.gamma_ci)},
                    {"stoye", stoye_json(report.stoye_gamma)}};
  j["theta0"] = json{{"bound_set", theta_set_json(bounds.theta_set)},
                     {"conventional_ci", theta_ci_json(report.theta0_conventional)},
                     {"ovb_ci", theta_ci_json(report.theta0_ci)},
                     {"stoye_ci", theta_ci_json(report.stoye_theta_ci)},
                     {"stoye", stoye_json(report.stoye_theta)}};
  if (!benchmark.is_null()) j["benchmark"] = benchmark;
  write_json(fs::path(cfg.out_dir) / "ci.json", j);

  {
    std::ostringstream os;
    os << "t,lower,upper,se_lower,se_upper\n";
    for (const auto& row : report.phi_curve)
      os << format_double(row.t) << ',' << format_double(row.ci_lo) << ','
         << format_double(row.ci_hi) << ',' << format_double(row.se_lo) << ','
         << format_double(row.se_hi) << '\n';
    write_text(fs::path(cfg.out_dir) / "phi_curve.csv", os.str());
  }

  const double pct = 100 * (1 - 2 * cfg.tau);
  const double spct = 100 * (1 - cfg.stoye_tau);
  std::ostringstream os;
  os << "confidence intervals (" << to_string(est.estimand) << ", tau=" << fmt(cfg.tau) << ")\n"
     << "  lambda: est " << fmt(est.lambda_s) << "  conventional " << fmt(pct) << "% "
     << interval_text(report.lambda_conventional) << "  OVB-adjusted "
     << interval_text(report.lambda_ci) << "  Stoye " << fmt(spct) << "% "
     << (report.stoye_lambda.empty ? "(empty)" : interval_text(report.stoye_lambda.ci))
     << "  [z_l*=" << fmt(report.stoye_lambda.z_l_star)
     << " z_u*=" << fmt(report.stoye_lambda.z_u_star)
     << " delta*=" << fmt(report.stoye_lambda.delta_star)
     << " obj=" << fmt(report.stoye_lambda.min_objective)
     << " rho=" << fmt(report.stoye_lambda.rho_hat) << "]\n"
     << "  gamma:  est " << fmt(est.gamma_s) << "  conventional " << fmt(pct) << "% "
     << interval_text(report.gamma_conventional) << "  OVB-adjusted "
     << interval_text(report.gamma_ci) << "  Stoye " << fmt(spct) << "% "
     << (report.stoye_gamma.empty ? "(empty)" : interval_text(report.stoye_gamma.ci))
     << "  [z_l*=" << fmt(report.stoye_gamma.z_l_star)
     << " z_u*=" << fmt(report.stoye_gamma.z_u_star)
     << " delta*=" << fmt(report.stoye_gamma.delta_star)
     << " obj=" << fmt(report.stoye_gamma.min_objective)
     << " rho=" << fmt(report.stoye_gamma.rho_hat) << "]\n"
     << "  theta0: bound set " << theta_set_text(bounds.theta_set) << "\n"
     << "          conventional inversion "
     << (report.theta0_conventional.empty ? "(empty)"
                                          : interval_text(report.theta0_conventional.ci))
     << "\n          OVB-adjusted inversion "
     << (report.theta0_ci.empty ? "(empty)" : interval_text(report.theta0_ci.ci))
     << "\n          Stoye " << fmt(spct) << "% "
     << (report.stoye_theta_ci.empty ? "(empty)" : interval_text(report.stoye_theta_ci.ci))
     << "  [avg z_l*=" << fmt(report.stoye_theta.z_l_star)
     << " z_u*=" << fmt(report.stoye_theta.z_u_star)
     << " delta*=" << fmt(report.stoye_theta.delta_star)
     << " obj=" << fmt(report.stoye_theta.min_objective) << "]\n";
  write_text(fs::path(cfg.out_dir) / "ci.txt", os.str());
  std::cout << os.str();
  return bounds.theta_set.first_stage_failure ? kExitFirstStage : kExitOk;
}

int cmd_contour(const RunConfig& cfg) {
  const ShortEstimates est = obtain_estimates(cfg);
  std::vector<double> grid(static_cast<std::size_t>(cfg.cc_points));
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = cfg.cc_max * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  const ContourTable table = contour_grid(est, cfg.sensitivity.rho_y_abs, cfg.tau, grid);

  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, "contour");
  std::ostringstream os;
  os << "zeta,lambda_lower,gamma_lower\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << format_double(table.cc[i]) << ',' << format_double(table.lambda_lower[i]) << ','
       << format_double(table.gamma_lower[i]) << '\n';
  write_text(fs::path(cfg.out_dir) / "contour.csv", os.str());

  json j;
  j["tau"] = cfg.tau;
  const auto rl = robustness_threshold(est, BoundTarget::Lambda, cfg.sensitivity.rho_y_abs, cfg.tau);
  const auto rg = robustness_threshold(est, BoundTarget::Gamma, cfg.sensitivity.rho_d_abs, cfg.tau);
  j["lambda_threshold"] =
      json{{"zeta_star", rl.zeta_star}, {"already_insignificant", rl.already_insignificant}};
  j["gamma_threshold"] =
      json{{"zeta_star", rg.zeta_star}, {"already_insignificant", rg.already_insignificant}};
  write_json(fs::path(cfg.out_dir) / "thresholds.json", j);

  std::cout << "contour written to " << (fs::path(cfg.out_dir) / "contour.csv").string() << "\n"
            << "  lambda crossing zeta* = " << fmt(rl.zeta_star)
            << (rl.already_insignificant ? " (not significant at zeta=0)" : "") << "\n"
            << "  gamma crossing zeta*  = " << fmt(rg.zeta_star)
            << (rg.already_insignificant ? " (not significant at zeta=0)" : "") << "\n";
  return kExitOk;
}

int cmd_benchmark(const RunConfig& cfg) {
  if (cfg.groups_path.empty())
    throw InputError("benchmark requires a group-definition file ([sensitivity] groups)");
  RunConfig with_benchmark = cfg;
  with_benchmark.calibrate_benchmark = true;
  json benchmark;
  resolve_sensitivity(with_benchmark, &benchmark);
  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, "benchmark");
  write_json(fs::path(cfg.out_dir) / "benchmark.json", benchmark);

  std::ostringstream os;
  os << "benchmark calibration (k_alpha=" << fmt(cfg.k_alpha) << " k_y=" << fmt(cfg.k_y)
     << " k_d=" << fmt(cfg.k_d) << ")\n";
  for (const auto& row : benchmark.at("groups")) {
    os << "  " << row.at("group").get<std::string>() << ": c_alpha="
       << (row.at("c_alpha").is_null() ? std::string("undefined")
                                       : fmt(row.at("c_alpha").get<double>()))
       << " c_y=" << fmt(row.at("c_y").get<double>())
       << " c_d=" << fmt(row.at("c_d").get<double>());
    if (row.contains("error")) os << "  ERROR: " << row.at("error").get<std::string>();
    os << "\n";
  }
  const auto& mx = benchmark.at("max");
  os << "  max: c_alpha=" << fmt(mx.at("c_alpha").get<double>()) << " ("
     << mx.at("group_alpha").get<std::string>() << ")  c_y=" << fmt(mx.at("c_y").get<double>())
     << " (" << mx.at("group_y").get<std::string>() << ")  c_d="
     << fmt(mx.at("c_d").get<double>()) << " (" << mx.at("group_d").get<std::string>() << ")\n";
  write_text(fs::path(cfg.out_dir) / "benchmark.txt", os.str());
  std::cout << os.str();
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  sim::DgpSpec spec;
  if (cfg.dgp_preset == "jtpa")
    spec = sim::jtpa_lookalike(cfg.dgp_n, cfg.seed);
  else if (cfg.dgp_preset == "default")
    spec = sim::default_spec(cfg.estimand, cfg.dgp_n, cfg.seed);
  else
    throw InputError("unknown dgp preset '" + cfg.dgp_preset + "'");

  const sim::OracleTruth truth = sim::oracle_truth(spec);
  const SensitivityConfig sens = truth.config();
  const int reps = cfg.sim_reps;

  std::vector<int> cover_point(static_cast<std::size_t>(reps), 0);
  std::vector<int> cover_interval(static_cast<std::size_t>(reps), 0);
  std::vector<int> cover_stoye(static_cast<std::size_t>(reps), 0);
  std::vector<double> lambda_hat(static_cast<std::size_t>(reps), 0.0);

  parallel_for(static_cast<std::size_t>(reps), cfg.workers, [&](std::size_t r) {
    sim::DgpSpec rep_spec = spec;
    rep_spec.seed = derive_seed(cfg.seed, r);
    const sim::GeneratedData gen = sim::generate(rep_spec);
    LearnerSpec learner = cfg.learner;
    learner.seed = derive_seed(cfg.seed, 1000000 + r);
    const CrossfitResult fit =
        crossfit_estimate(gen.data, spec.estimand, learner, cfg.k_folds, derive_seed(cfg.seed, 2000000 + r), 1);
    const ShortEstimates& est = fit.est;
    lambda_hat[r] = est.lambda_s;

    const auto [llo, lhi] = bias_bound_lambda(est, sens);
    const PairStats stats = bound_pair_stats(est, sens, BoundTarget::Lambda);
    const Interval ci = one_sided_ci(llo, lhi, stats.se_lo, stats.se_hi, cfg.tau);
    cover_point[r] = (truth.lambda >= ci.lo && truth.lambda <= ci.hi) ? 1 : 0;
    const double tl = truth.lambda_s - std::abs(truth.rho_y) * truth.c_y * truth.c_alpha *
                                           std::sqrt(truth.sigma_ys2 * truth.v_s2);
    const double th = truth.lambda_s + std::abs(truth.rho_y) * truth.c_y * truth.c_alpha *
                                           std::sqrt(truth.sigma_ys2 * truth.v_s2);
    cover_interval[r] = (tl >= ci.lo && th <= ci.hi) ? 1 : 0;

    const StoyeResult stoye =
        stoye_ci(llo, lhi, stats.se_lo, stats.se_hi, stats.rho_hat, est.n, cfg.stoye_tau);
    cover_stoye[r] =
        (!stoye.empty && truth.lambda >= stoye.ci.lo && truth.lambda <= stoye.ci.hi) ? 1 : 0;
  });

  double cp = 0.0, cb = 0.0, cs = 0.0, mean_l = 0.0;
  for (int r = 0; r < reps; ++r) {
    cp += cover_point[static_cast<std::size_t>(r)];
    cb += cover_interval[static_cast<std::size_t>(r)];
    cs += cover_stoye[static_cast<std::size_t>(r)];
    mean_l += lambda_hat[static_cast<std::size_t>(r)];
  }
  cp /= reps;
  cb /= reps;
  cs /= reps;
  mean_l /= reps;

  fs::create_directories(cfg.out_dir);
  write_manifest(cfg, "simulate");
  json j;
  j["preset"] = cfg.dgp_preset;
  j["estimand"] = to_string(spec.estimand);
  j["n"] = spec.n;
  j["reps"] = reps;
  j["tau"] = cfg.tau;
  j["stoye_tau"] = cfg.stoye_tau;
  j["truth"] = json{{"lambda", truth.lambda},     {"lambda_s", truth.lambda_s},
                    {"gamma", truth.gamma},       {"gamma_s", truth.gamma_s},
                    {"theta", truth.theta},       {"c_alpha", truth.c_alpha},
                    {"c_y", truth.c_y},           {"c_d", truth.c_d},
                    {"rho_y", truth.rho_y},       {"rho_d", truth.rho_d}};
  j["mean_lambda_hat"] = mean_l;
  j["coverage_lambda_in_bound_ci"] = cp;
  j["coverage_bound_interval"] = cb;
  j["coverage_lambda_stoye"] = cs;
  j["nominal"] = 1.0 - 2.0 * cfg.tau;
  write_json(fs::path(cfg.out_dir) / "simulate.json", j);

  std::cout << "simulation (" << cfg.dgp_preset << ", " << to_string(spec.estimand)
            << ", n=" << spec.n << ", reps=" << reps << ")\n"
            << "  true lambda " << fmt(truth.lambda) << " (short " << fmt(truth.lambda_s)
            << "), mean estimate " << fmt(mean_l) << "\n"
            << "  coverage of lambda by CI_(1-2tau):  " << fmt(cp) << " (nominal >= "
            << fmt(1 - 2 * cfg.tau) << ")\n"
            << "  coverage of [lambda-, lambda+]:     " << fmt(cb) << "\n"
            << "  coverage of lambda by Stoye CI:     " << fmt(cs) << " (nominal >= "
            << fmt(1 - cfg.stoye_tau) << ")\n";
  return kExitOk;
}

int cmd_check_theorem1(double llo, double lhi, double glo, double ghi) {
  const ThetaSet set = theta_bounds(llo, lhi, glo, ghi);
  std::cout << "theta0 set for lambda [" << fmt(llo) << ", " << fmt(lhi) << "], gamma ["
            << fmt(glo) << ", " << fmt(ghi) << "]:\n  " << theta_set_text(set) << "  (case "
            << set.theorem_case << (set.first_stage_failure ? ", first-stage failure" : "")
            << ")\n";
  return set.first_stage_failure ? kExitFirstStage : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Omitted-variable-bias bounds and inference for IV estimators"};
  app.require_subcommand(1);

  std::string config_path, data_path, estimand_str, out_dir, estimates_path;
  std::optional<double> tau;
  std::optional<int> k_folds, reps, workers;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "config file (sections [run], [learner], [sensitivity], [grids], [dgp])");
  app.add_option("--data", data_path, "input CSV with columns y, d, z and covariates");
  app.add_option("--estimand", estimand_str, "late | latt | plivm");
  app.add_option("--tau", tau, "one-sided significance parameter in (0, 0.5]");
  app.add_option("--k-folds", k_folds, "number of cross-fitting folds");
  app.add_option("--reps", reps, "replications (median method; simulate run count)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads (0 = all cores)");
  app.add_option("--estimates", estimates_path, "reuse a prior estimate.json");

  auto* sub_estimate = app.add_subcommand("estimate", "cross-fitted short estimates");
  auto* sub_bounds = app.add_subcommand("bounds", "OVB bounds and the theta0 identification set");
  auto* sub_ci = app.add_subcommand("ci", "conventional, OVB-adjusted and shrinkage CIs");
  auto* sub_contour = app.add_subcommand("contour", "lower-CI contour over zeta and crossing thresholds");
  auto* sub_benchmark = app.add_subcommand("benchmark", "calibrate sensitivity values against covariate groups");
  auto* sub_simulate = app.add_subcommand("simulate", "coverage study on a synthetic process");
  auto* sub_check = app.add_subcommand("check-theorem1", "identification-set arithmetic on literal bounds");
  for (auto* sub : {sub_estimate, sub_bounds, sub_ci, sub_contour, sub_benchmark, sub_simulate,
                    sub_check})
    sub->fallthrough();  // global flags may follow the subcommand name
  double c_llo = 0, c_lhi = 0, c_glo = 0, c_ghi = 0;
  sub_check->add_option("--lambda-lo", c_llo)->required();
  sub_check->add_option("--lambda-hi", c_lhi)->required();
  sub_check->add_option("--gamma-lo", c_glo)->required();
  sub_check->add_option("--gamma-hi", c_ghi)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    if (!data_path.empty()) cfg.data_path = data_path;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!estimates_path.empty()) cfg.estimates_path = estimates_path;
    if (!estimand_str.empty()) {
      const auto e = estimand_from_string(estimand_str);
      if (!e) throw InputError("unknown estimand '" + estimand_str + "'");
      cfg.estimand = *e;
    }
    if (tau) cfg.tau = *tau;
    if (k_folds) cfg.k_folds = *k_folds;
    if (reps) {
      cfg.replications = *reps;
      cfg.sim_reps = *reps;
    }
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;

    if (!sub_check->parsed()) {
      const auto errors = cfg.validate();
      if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw InputError(msg);
      }
    }

    if (sub_estimate->parsed()) return cmd_estimate(cfg);
    if (sub_bounds->parsed()) return cmd_bounds(cfg);
    if (sub_ci->parsed()) return cmd_ci(cfg);
    if (sub_contour->parsed()) return cmd_contour(cfg);
    if (sub_benchmark->parsed()) return cmd_benchmark(cfg);
    if (sub_simulate->parsed()) return cmd_simulate(cfg);
    if (sub_check->parsed()) return cmd_check_theorem1(c_llo, c_lhi, c_glo, c_ghi);
    return kExitInput;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
