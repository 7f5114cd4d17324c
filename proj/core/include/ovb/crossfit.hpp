#pragma once

#include <cstdint>
#include <vector>

#include "ovb/learners.hpp"
#include "ovb/model.hpp"
#include "ovb/scores.hpp"

namespace ovb {

struct FoldPlan {
  int k_folds = 0;
  std::vector<int> assignments;  // fold id per observation, in [0, K)
  std::uint64_t seed = 0;
};

// Uniform random permutation cut into K near-equal blocks; sizes differ by at
// most one. Deterministic given the seed.
FoldPlan assign_folds(std::size_t n, int k_folds, std::uint64_t seed);

struct CrossfitResult {
  ShortEstimates est;
  std::vector<double> fold_lambda;  // per-fold means of the uncentered scores
  std::vector<double> fold_gamma;
  double theta_dml1 = 0.0;  // mean of per-fold ratios, diagnostic only
  bool theta_dml1_defined = false;
};

// One K-fold cross-fitted estimation of the five short parameters with
// covariance. Nuisances are fit on each fold's complement; scores are pooled
// across all observations (DML2).
CrossfitResult crossfit_estimate(const Dataset& data, Estimand estimand, const LearnerSpec& spec,
                                 const FoldPlan& plan, int workers = 0);
CrossfitResult crossfit_estimate(const Dataset& data, Estimand estimand, const LearnerSpec& spec,
                                 int k_folds, std::uint64_t seed, int workers = 0);

// Coordinatewise median of the parameter vectors; the covariance is the
// inflated matrix whose operator norm is the (lower) median across
// replications.
CrossfitResult median_aggregate(const std::vector<CrossfitResult>& results);

// L independent cross-fittings reduced by median_aggregate. Replication l
// uses fold seed derive_seed(seed, l).
CrossfitResult median_crossfit(const Dataset& data, Estimand estimand, const LearnerSpec& spec,
                               int k_folds, int replications, std::uint64_t seed,
                               int workers = 0);

}  // namespace ovb
