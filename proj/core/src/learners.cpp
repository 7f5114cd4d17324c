#include "ovb/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ovb/parallel.hpp"
#include "ovb/rng.hpp"

namespace ovb {

std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::RandomForest: return "random_forest";
    case LearnerKind::Ridge: return "ridge";
    case LearnerKind::SaturatedCells: return "saturated_cells";
  }
  return "random_forest";
}

std::optional<LearnerKind> learner_kind_from_string(const std::string& s) {
  if (s == "random_forest" || s == "forest") return LearnerKind::RandomForest;
  if (s == "ridge") return LearnerKind::Ridge;
  if (s == "saturated_cells" || s == "cells") return LearnerKind::SaturatedCells;
  return std::nullopt;
}

int LearnerSpec::resolve_mtry(std::size_t q, TargetKind target) const {
  if (mtry > 0) return std::min<int>(mtry, static_cast<int>(q));
  if (target == TargetKind::Probability)
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(q))));
  return std::max(1, static_cast<int>(q) / 3);
}

namespace detail {

double Tree::predict_row(const double* row) const {
  int node = 0;
  for (;;) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    if (nd.feature < 0) return nd.value;
    node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
}

namespace {

struct TreeBuilder {
  const Matrix& x;
  const std::vector<double>& y;
  int min_leaf;
  int max_depth;
  int mtry;
  Rng rng;
  Tree tree;
  std::vector<int> feature_pool;

  TreeBuilder(const Matrix& x_, const std::vector<double>& y_, int min_leaf_, int max_depth_,
              int mtry_, std::uint64_t seed)
      : x(x_), y(y_), min_leaf(min_leaf_), max_depth(max_depth_), mtry(mtry_), rng(seed) {
    feature_pool.resize(x.cols());
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
  }

  int make_leaf(const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += y[i];
    TreeNode leaf;
    leaf.value = s / static_cast<double>(idx.size());
    tree.nodes.push_back(leaf);
    return static_cast<int>(tree.nodes.size() - 1);
  }

  // Best variance-reduction split on one feature. Returns improvement of
  // sum(L)^2/nL + sum(R)^2/nR over sum^2/n, or -1 if no valid split.
  bool best_split_on(int feat, const std::vector<std::size_t>& idx,
                     std::vector<std::pair<double, double>>& scratch, double& best_gain,
                     double& best_threshold) const {
    scratch.clear();
    for (std::size_t i : idx) scratch.emplace_back(x(i, static_cast<std::size_t>(feat)), y[i]);
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t m = scratch.size();
    double total = 0.0;
    for (const auto& p : scratch) total += p.second;
    const double base = total * total / static_cast<double>(m);

    bool found = false;
    double left_sum = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      left_sum += scratch[k].second;
      if (scratch[k].first == scratch[k + 1].first) continue;
      const std::size_t nl = k + 1, nr = m - nl;
      if (nl < static_cast<std::size_t>(min_leaf) || nr < static_cast<std::size_t>(min_leaf))
        continue;
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / static_cast<double>(nl) +
                          right_sum * right_sum / static_cast<double>(nr) - base;
      if (gain > best_gain) {
        best_gain = gain;
        best_threshold = 0.5 * (scratch[k].first + scratch[k + 1].first);
        found = true;
      }
    }
    return found;
  }

  int build(std::vector<std::size_t>& idx, int depth) {
    const std::size_t m = idx.size();
    bool constant = true;
    for (std::size_t i = 1; i < m && constant; ++i) constant = y[idx[i]] == y[idx[0]];
    if (constant || m < 2 * static_cast<std::size_t>(min_leaf) ||
        (max_depth > 0 && depth >= max_depth)) {
      return make_leaf(idx);
    }

    // Sample mtry candidate features without replacement.
    const std::size_t q = x.cols();
    for (std::size_t k = 0; k < static_cast<std::size_t>(mtry) && k < q; ++k) {
      std::size_t j = k + static_cast<std::size_t>(rng.bounded(q - k));
      std::swap(feature_pool[k], feature_pool[j]);
    }

    std::vector<std::pair<double, double>> scratch;
    double best_gain = 1e-12;  // require strictly positive improvement
    double best_threshold = 0.0;
    int best_feature = -1;
    for (std::size_t k = 0; k < static_cast<std::size_t>(mtry) && k < q; ++k) {
      const int feat = feature_pool[k];
      double gain = best_gain, threshold = 0.0;
      if (best_split_on(feat, idx, scratch, gain, threshold)) {
        best_gain = gain;
        best_threshold = threshold;
        best_feature = feat;
      }
    }
    if (best_feature < 0) return make_leaf(idx);

    std::vector<std::size_t> left, right;
    left.reserve(m);
    right.reserve(m);
    for (std::size_t i : idx)
      (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return make_leaf(idx);

    TreeNode nd;
    nd.feature = best_feature;
    nd.threshold = best_threshold;
    tree.nodes.push_back(nd);
    const int self = static_cast<int>(tree.nodes.size() - 1);
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].left = l;
    tree.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

}  // namespace

}  // namespace detail

namespace {

std::shared_ptr<detail::ForestState> fit_forest(const LearnerSpec& spec, const Matrix& x,
                                                const std::vector<double>& y, TargetKind target,
                                                int workers) {
  const std::size_t n = x.rows();
  const int mtry = spec.resolve_mtry(x.cols(), target);
  auto state = std::make_shared<detail::ForestState>();
  state->trees.resize(static_cast<std::size_t>(spec.trees));
  parallel_for(static_cast<std::size_t>(spec.trees), workers, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(spec.seed, t);
    Rng boot(derive_seed(tree_seed, 0x626f6f74ULL));
    std::vector<std::size_t> idx(n);
    if (spec.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::size_t>(boot.bounded(n));
      std::sort(idx.begin(), idx.end());
    } else {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
    }
    detail::TreeBuilder builder(x, y, spec.min_leaf, spec.max_depth, mtry, tree_seed);
    builder.build(idx, 0);
    state->trees[t] = std::move(builder.tree);
  });
  return state;
}

std::shared_ptr<detail::RidgeState> fit_ridge(const LearnerSpec& spec, const Matrix& x,
                                              const std::vector<double>& y) {
  const std::size_t n = x.rows(), q = x.cols();
  Eigen::MatrixXd xc(n, q);
  Eigen::VectorXd yc(n);
  Eigen::VectorXd xmean = Eigen::VectorXd::Zero(static_cast<long>(q));
  double ymean = 0.0;
  for (std::size_t i = 0; i < n; ++i) ymean += y[i];
  ymean /= static_cast<double>(n);
  for (std::size_t j = 0; j < q; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x(i, j);
    xmean[static_cast<long>(j)] = s / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    yc[static_cast<long>(i)] = y[i] - ymean;
    for (std::size_t j = 0; j < q; ++j)
      xc(static_cast<long>(i), static_cast<long>(j)) = x(i, j) - xmean[static_cast<long>(j)];
  }

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += spec.ridge_penalty * static_cast<double>(n);
  Eigen::VectorXd rhs = xc.transpose() * yc;

  Eigen::VectorXd beta;
  if (spec.ridge_penalty == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
    if (qr.rank() < static_cast<long>(q))
      throw std::runtime_error("ridge: singular system with penalty 0 (collinear features)");
    beta = qr.solve(yc);
  } else {
    beta = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(rhs);
  }

  auto state = std::make_shared<detail::RidgeState>();
  state->beta.assign(beta.data(), beta.data() + q);
  state->intercept = ymean - beta.dot(xmean);
  return state;
}

std::vector<long long> cell_key(const double* row, std::size_t q) {
  std::vector<long long> key(q);
  for (std::size_t j = 0; j < q; ++j) {
    const double r = std::round(row[j]);
    if (std::abs(row[j] - r) > 1e-9)
      throw std::runtime_error("saturated_cells: feature value " + format_double(row[j]) +
                               " is not discrete");
    key[j] = static_cast<long long>(r);
  }
  return key;
}

std::string cell_name(const std::vector<long long>& key) {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < key.size(); ++j) os << (j ? "," : "") << key[j];
  os << ')';
  return os.str();
}

std::shared_ptr<detail::CellsState> fit_cells(const Matrix& x, const std::vector<double>& y) {
  std::map<std::vector<long long>, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto key = cell_key(x.row(i), x.cols());
    auto& slot = acc[key];
    slot.first += y[i];
    slot.second += 1;
  }
  auto state = std::make_shared<detail::CellsState>();
  for (const auto& [key, sum_count] : acc)
    state->means[key] = sum_count.first / static_cast<double>(sum_count.second);
  return state;
}

}  // namespace

FittedLearner fit_learner(const LearnerSpec& spec, const Matrix& features,
                          const std::vector<double>& targets, TargetKind target, int workers) {
  if (features.rows() != targets.size())
    throw std::invalid_argument("fit: feature rows != target length");
  if (features.rows() < 2) throw std::invalid_argument("fit: need at least 2 observations");
  if (features.cols() < 1) throw std::invalid_argument("fit: need at least 1 feature");
  if (target == TargetKind::Probability) {
    for (double t : targets)
      if (t != 0.0 && t != 1.0)
        throw std::invalid_argument("fit: probability targets must be 0/1");
  }

  FittedLearner fitted;
  fitted.kind_ = spec.kind;
  fitted.target_ = target;
  fitted.width_ = features.cols();
  switch (spec.kind) {
    case LearnerKind::RandomForest:
      if (spec.trees < 1) throw std::invalid_argument("fit: trees must be positive");
      if (spec.min_leaf < 1) throw std::invalid_argument("fit: min_leaf must be positive");
      fitted.forest_ = fit_forest(spec, features, targets, target, workers);
      break;
    case LearnerKind::Ridge:
      if (spec.ridge_penalty < 0.0) throw std::invalid_argument("fit: ridge_penalty must be >= 0");
      fitted.ridge_ = fit_ridge(spec, features, targets);
      break;
    case LearnerKind::SaturatedCells:
      fitted.cells_ = fit_cells(features, targets);
      break;
  }
  return fitted;
}

double FittedLearner::predict_row(const double* row, std::size_t q) const {
  if (q != width_)
    throw std::invalid_argument("predict: feature width " + std::to_string(q) +
                                " != fit-time width " + std::to_string(width_));
  double value = 0.0;
  switch (kind_) {
    case LearnerKind::RandomForest: {
      double s = 0.0;
      for (const auto& tree : forest_->trees) s += tree.predict_row(row);
      value = s / static_cast<double>(forest_->trees.size());
      break;
    }
    case LearnerKind::Ridge: {
      double s = ridge_->intercept;
      for (std::size_t j = 0; j < q; ++j) s += ridge_->beta[j] * row[j];
      value = s;
      break;
    }
    case LearnerKind::SaturatedCells: {
      const auto key = cell_key(row, q);
      auto it = cells_->means.find(key);
      if (it == cells_->means.end())
        throw std::runtime_error("saturated_cells: no training observations for cell " +
                                 cell_name(key));
      value = it->second;
      break;
    }
  }
  if (target_ == TargetKind::Probability)
    value = std::clamp(value, kProbabilityClip, 1.0 - kProbabilityClip);
  return value;
}

std::vector<double> FittedLearner::predict(const Matrix& features) const {
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i)
    out[i] = predict_row(features.row(i), features.cols());
  return out;
}

std::string learner_spec_to_text(const LearnerSpec& spec) {
  std::ostringstream os;
  os << "kind=" << to_string(spec.kind) << '\n'
     << "trees=" << spec.trees << '\n'
     << "min_leaf=" << spec.min_leaf << '\n'
     << "max_depth=" << spec.max_depth << '\n'
     << "mtry=" << spec.mtry << '\n'
     << "bootstrap=" << (spec.bootstrap ? 1 : 0) << '\n'
     << "ridge_penalty=" << format_double(spec.ridge_penalty) << '\n'
     << "seed=" << spec.seed << '\n';
  return os.str();
}

void apply_learner_key(LearnerSpec& spec, const std::string& key, const std::string& value) {
  if (key == "kind") {
    auto k = learner_kind_from_string(value);
    if (!k) throw std::runtime_error("learner: unknown kind '" + value + "'");
    spec.kind = *k;
  } else if (key == "trees") {
    spec.trees = std::stoi(value);
  } else if (key == "min_leaf") {
    spec.min_leaf = std::stoi(value);
  } else if (key == "max_depth") {
    spec.max_depth = std::stoi(value);
  } else if (key == "mtry") {
    spec.mtry = std::stoi(value);
  } else if (key == "bootstrap") {
    spec.bootstrap = value == "1" || value == "true" || value == "yes";
  } else if (key == "ridge_penalty") {
    spec.ridge_penalty = std::stod(value);
  } else if (key == "seed") {
    spec.seed = std::stoull(value);
  } else {
    throw std::runtime_error("learner: unknown key '" + key + "'");
  }
}

}  // namespace ovb
