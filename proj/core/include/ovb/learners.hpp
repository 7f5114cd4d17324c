#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ovb/model.hpp"

namespace ovb {

enum class LearnerKind { RandomForest, Ridge, SaturatedCells };
enum class TargetKind { Mean, Probability };

std::string to_string(LearnerKind k);
std::optional<LearnerKind> learner_kind_from_string(const std::string& s);

// Probability predictions are clipped to [clip, 1-clip]; inverse-propensity
// weights blow up otherwise.
inline constexpr double kProbabilityClip = 0.01;

struct LearnerSpec {
  LearnerKind kind = LearnerKind::RandomForest;
  int trees = 200;
  int min_leaf = 5;
  int max_depth = 0;   // 0: unlimited
  int mtry = 0;        // 0: ceil(sqrt(q)) for probability targets, max(1, q/3) for means
  bool bootstrap = true;
  double ridge_penalty = 0.0;
  std::uint64_t seed = 0;

  int resolve_mtry(std::size_t q, TargetKind target) const;
};

namespace detail {

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict_row(const double* row) const;
};

struct ForestState {
  std::vector<Tree> trees;
};

struct RidgeState {
  std::vector<double> beta;  // slope per feature
  double intercept = 0.0;
};

struct CellsState {
  std::map<std::vector<long long>, double> means;
};

}  // namespace detail

// Immutable fitted state; predict is pure and shareable across threads.
class FittedLearner {
 public:
  std::vector<double> predict(const Matrix& features) const;
  double predict_row(const double* row, std::size_t q) const;
  TargetKind target() const { return target_; }
  std::size_t width() const { return width_; }

 private:
  friend FittedLearner fit_learner(const LearnerSpec&, const Matrix&,
                                   const std::vector<double>&, TargetKind, int);
  LearnerKind kind_ = LearnerKind::RandomForest;
  TargetKind target_ = TargetKind::Mean;
  std::size_t width_ = 0;
  std::shared_ptr<const detail::ForestState> forest_;
  std::shared_ptr<const detail::RidgeState> ridge_;
  std::shared_ptr<const detail::CellsState> cells_;
};

// Deterministic given (spec.seed, inputs). Tree construction may run in
// parallel; per-tree seeds are derived from spec.seed by index so the result
// does not depend on the worker count.
FittedLearner fit_learner(const LearnerSpec& spec, const Matrix& features,
                          const std::vector<double>& targets, TargetKind target,
                          int workers = 0);

// key=value serialization for the CLI config ([learner] section).
std::string learner_spec_to_text(const LearnerSpec& spec);
void apply_learner_key(LearnerSpec& spec, const std::string& key, const std::string& value);

}  // namespace ovb
