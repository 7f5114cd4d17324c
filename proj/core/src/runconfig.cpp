#include "ovb/runconfig.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ovb {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void apply_run_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "estimand") {
    auto e = estimand_from_string(value);
    if (!e) throw std::runtime_error("config: unknown estimand '" + value + "'");
    cfg.estimand = *e;
  } else if (key == "data") {
    cfg.data_path = value;
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "k_folds") {
    cfg.k_folds = std::stoi(value);
  } else if (key == "replications") {
    cfg.replications = std::stoi(value);
  } else if (key == "seed") {
    cfg.seed = std::stoull(value);
  } else if (key == "tau") {
    cfg.tau = std::stod(value);
  } else if (key == "stoye_tau") {
    cfg.stoye_tau = std::stod(value);
  } else if (key == "workers") {
    cfg.workers = std::stoi(value);
  } else if (key == "estimates") {
    cfg.estimates_path = value;
  } else {
    throw std::runtime_error("config: unknown [run] key '" + key + "'");
  }
}

void apply_sensitivity_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "c_alpha") cfg.sensitivity.c_alpha = std::stod(value);
  else if (key == "c_y") cfg.sensitivity.c_y = std::stod(value);
  else if (key == "c_d") cfg.sensitivity.c_d = std::stod(value);
  else if (key == "rho_y") cfg.sensitivity.rho_y_abs = std::stod(value);
  else if (key == "rho_d") cfg.sensitivity.rho_d_abs = std::stod(value);
  else if (key == "groups") cfg.groups_path = value;
  else if (key == "calibrate")
    cfg.calibrate_benchmark = value == "benchmark";
  else if (key == "k_alpha") cfg.k_alpha = std::stod(value);
  else if (key == "k_y") cfg.k_y = std::stod(value);
  else if (key == "k_d") cfg.k_d = std::stod(value);
  else throw std::runtime_error("config: unknown [sensitivity] key '" + key + "'");
}

void apply_grids_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "t_lo") {
    cfg.t_lo = std::stod(value);
    cfg.t_range_set = true;
  } else if (key == "t_hi") {
    cfg.t_hi = std::stod(value);
    cfg.t_range_set = true;
  } else if (key == "t_points") {
    cfg.t_points = std::stoi(value);
  } else if (key == "cc_max") {
    cfg.cc_max = std::stod(value);
  } else if (key == "cc_points") {
    cfg.cc_points = std::stoi(value);
  } else if (key == "phi_points") {
    cfg.phi_points = std::stoi(value);
  } else {
    throw std::runtime_error("config: unknown [grids] key '" + key + "'");
  }
}

void apply_dgp_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "preset") cfg.dgp_preset = value;
  else if (key == "n") cfg.dgp_n = static_cast<std::size_t>(std::stoull(value));
  else if (key == "reps") cfg.sim_reps = std::stoi(value);
  else throw std::runtime_error("config: unknown [dgp] key '" + key + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section = "run";
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (section == "run") apply_run_key(cfg, key, value);
      else if (section == "learner") apply_learner_key(cfg.learner, key, value);
      else if (section == "sensitivity") apply_sensitivity_key(cfg, key, value);
      else if (section == "grids") apply_grids_key(cfg, key, value);
      else if (section == "dgp") apply_dgp_key(cfg, key, value);
      else throw std::runtime_error("config: unknown section [" + section + "]");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config: bad value '" + value + "' for key '" + key + "' at line " +
                               std::to_string(lineno));
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> errors;
  if (k_folds < 2) errors.push_back("k_folds must be >= 2");
  if (replications < 1) errors.push_back("replications must be >= 1");
  if (!(tau > 0.0 && tau <= 0.5)) errors.push_back("tau must lie in (0, 0.5]");
  if (!(stoye_tau > 0.0 && stoye_tau <= 0.5)) errors.push_back("stoye_tau must lie in (0, 0.5]");
  if (t_range_set && !(t_hi > t_lo)) errors.push_back("t range must have positive width");
  if (t_points < 3) errors.push_back("t_points must be >= 3");
  if (cc_points < 2) errors.push_back("cc_points must be >= 2");
  if (!(cc_max > 0.0)) errors.push_back("cc_max must be positive");
  if (sim_reps < 1) errors.push_back("reps must be >= 1");
  for (const auto& e : sensitivity.validate()) errors.push_back(e);
  return errors;
}

std::string RunConfig::resolved_text() const {
  // The output directory is not part of the run identity, so it stays out of
  // the hashed text.
  std::ostringstream os;
  os << "[run]\n"
     << "estimand=" << to_string(estimand) << "\ndata=" << data_path
     << "\nk_folds=" << k_folds << "\nreplications=" << replications << "\nseed=" << seed
     << "\ntau=" << format_double(tau) << "\nstoye_tau=" << format_double(stoye_tau)
     << "\nworkers=" << workers << "\nestimates=" << estimates_path << "\n[learner]\n"
     << learner_spec_to_text(learner) << "[sensitivity]\n"
     << "c_alpha=" << format_double(sensitivity.c_alpha) << "\nc_y=" << format_double(sensitivity.c_y)
     << "\nc_d=" << format_double(sensitivity.c_d)
     << "\nrho_y=" << format_double(sensitivity.rho_y_abs)
     << "\nrho_d=" << format_double(sensitivity.rho_d_abs) << "\ngroups=" << groups_path
     << "\ncalibrate=" << (calibrate_benchmark ? "benchmark" : "direct")
     << "\nk_alpha=" << format_double(k_alpha) << "\nk_y=" << format_double(k_y)
     << "\nk_d=" << format_double(k_d) << "\n[grids]\n";
  if (t_range_set) os << "t_lo=" << format_double(t_lo) << "\nt_hi=" << format_double(t_hi) << "\n";
  os << "t_points=" << t_points << "\ncc_max=" << format_double(cc_max)
     << "\ncc_points=" << cc_points << "\nphi_points=" << phi_points << "\n[dgp]\n"
     << "preset=" << dgp_preset << "\nn=" << dgp_n << "\nreps=" << sim_reps << "\n";
  return os.str();
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hash(ss.str());
}

}  // namespace ovb
