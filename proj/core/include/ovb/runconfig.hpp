#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ovb/learners.hpp"
#include "ovb/model.hpp"

namespace ovb {

// Effective settings for one CLI run: the [run]/[learner]/[sensitivity]/
// [grids]/[dgp] sections of the config file with flag overrides applied.
struct RunConfig {
  Estimand estimand = Estimand::LATE;
  std::string data_path;
  std::string out_dir = ".";
  int k_folds = 5;
  int replications = 5;
  std::uint64_t seed = 1;
  double tau = 0.025;
  double stoye_tau = 0.05;
  int workers = 0;
  std::string estimates_path;  // reuse a prior estimate file when set

  LearnerSpec learner;

  SensitivityConfig sensitivity;
  std::string groups_path;
  bool calibrate_benchmark = false;  // derive C values from the group file
  double k_alpha = 1.0, k_y = 1.0, k_d = 1.0;

  bool t_range_set = false;
  double t_lo = 0.0, t_hi = 0.0;
  int t_points = 2001;
  double cc_max = 0.5;
  int cc_points = 51;
  int phi_points = 201;

  // [dgp] section for the simulate subcommand.
  std::string dgp_preset = "default";
  std::size_t dgp_n = 2000;
  int sim_reps = 500;

  std::vector<std::string> validate() const;
  std::string resolved_text() const;  // canonical serialization for the manifest
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

std::uint64_t fnv1a_hash(const std::string& text);
std::uint64_t hash_file(const std::string& path);  // 0 when the file cannot be read

}  // namespace ovb
