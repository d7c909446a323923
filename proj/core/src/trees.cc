/*
 * Copyright 2026 The adsorbxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// CART regression trees and the ensembles built from them: random forest,
// least-squares gradient boosting and AdaBoost.R2.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "adsorbxai/error.h"
#include "adsorbxai/parallel.h"
#include "adsorbxai/random.h"
#include "regressor.h"

namespace adsorbxai::detail {
namespace {

using nlohmann::json;

struct TreeParams {
  int max_depth = -1;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_features = 0;  // 0: all
};

class RegressionTree {
 public:
  // Rows with zero weight are ignored. `rng` is only consulted when
  // max_features subsamples the candidate features.
  static RegressionTree Fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const std::vector<double>& weights, const TreeParams& params,
                            Rng* rng) {
    RegressionTree tree;
    Builder builder{x, y, weights, params, rng, tree.nodes_};
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (weights[static_cast<std::size_t>(r)] > 0.0) rows.push_back(r);
    }
    if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "tree fit on zero total weight");
    builder.Build(rows, 0);
    return tree;
  }

  double PredictRow(const Eigen::MatrixXd& x, Eigen::Index r) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const Node& n = nodes_[static_cast<std::size_t>(node)];
      node = x(r, n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(node)].value;
  }

  json ToJson() const {
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), value = json::array();
    for (const Node& n : nodes_) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left},
            {"right", right},     {"value", value}};
  }

  static RegressionTree FromJson(const json& j) {
    RegressionTree tree;
    const auto& feature = j.at("feature");
    for (std::size_t i = 0; i < feature.size(); ++i) {
      tree.nodes_.push_back({feature[i].get<int>(), j.at("threshold")[i].get<double>(),
                             j.at("left")[i].get<int>(), j.at("right")[i].get<int>(),
                             j.at("value")[i].get<double>()});
    }
    if (tree.nodes_.empty()) throw Error(ErrorCode::kMalformedFile, "empty tree");
    return tree;
  }

 private:
  struct Node {
    int feature;  // -1 for leaves
    double threshold;
    int left;
    int right;
    double value;
  };

  struct Builder {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    const std::vector<double>& w;
    const TreeParams& params;
    Rng* rng;
    std::vector<Node>& nodes;

    int Build(std::vector<Eigen::Index>& rows, int depth) {
      const int id = static_cast<int>(nodes.size());
      nodes.push_back({-1, 0.0, -1, -1, 0.0});

      double total_w = 0.0, total_s = 0.0;
      bool constant = true;
      for (Eigen::Index r : rows) {
        total_w += w[static_cast<std::size_t>(r)];
        total_s += w[static_cast<std::size_t>(r)] * y(r);
        constant = constant && y(r) == y(rows.front());
      }
      nodes[static_cast<std::size_t>(id)].value = constant ? y(rows.front()) : total_s / total_w;

      const auto m = static_cast<int>(rows.size());
      if (constant || (params.max_depth >= 0 && depth >= params.max_depth) ||
          m < params.min_samples_split || m < 2 * params.min_samples_leaf) {
        return id;
      }

      const int num_features = static_cast<int>(x.cols());
      std::vector<int> features(static_cast<std::size_t>(num_features));
      std::iota(features.begin(), features.end(), 0);
      if (params.max_features > 0 && params.max_features < num_features) {
        for (int k = 0; k < params.max_features; ++k) {
          const auto pick =
              k + static_cast<int>(rng->Below(static_cast<uint64_t>(num_features - k)));
          std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick)]);
        }
        features.resize(static_cast<std::size_t>(params.max_features));
      }

      const double parent_score = total_s * total_s / total_w;
      double best_score = parent_score;
      int best_feature = -1;
      double best_threshold = 0.0;
      std::vector<Eigen::Index> sorted(rows);
      for (int f : features) {
        std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
          const double xa = x(a, f), xb = x(b, f);
          return xa < xb || (xa == xb && a < b);
        });
        double left_w = 0.0, left_s = 0.0;
        for (int k = 0; k + 1 < m; ++k) {
          const Eigen::Index r = sorted[static_cast<std::size_t>(k)];
          left_w += w[static_cast<std::size_t>(r)];
          left_s += w[static_cast<std::size_t>(r)] * y(r);
          const double here = x(r, f);
          const double next = x(sorted[static_cast<std::size_t>(k + 1)], f);
          if (!(here < next)) continue;
          if (k + 1 < params.min_samples_leaf || m - k - 1 < params.min_samples_leaf) continue;
          const double right_w = total_w - left_w;
          if (left_w <= 0.0 || right_w <= 0.0) continue;
          const double right_s = total_s - left_s;
          const double score = left_s * left_s / left_w + right_s * right_s / right_w;
          if (score > best_score) {
            best_score = score;
            best_feature = f;
            best_threshold = here;
          }
        }
      }
      if (best_feature < 0) return id;

      std::vector<Eigen::Index> left_rows, right_rows;
      for (Eigen::Index r : rows) {
        (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
      }
      rows.clear();
      rows.shrink_to_fit();
      nodes[static_cast<std::size_t>(id)].feature = best_feature;
      nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
      const int left = Build(left_rows, depth + 1);
      const int right = Build(right_rows, depth + 1);
      nodes[static_cast<std::size_t>(id)].left = left;
      nodes[static_cast<std::size_t>(id)].right = right;
      return id;
    }
  };

  std::vector<Node> nodes_;
};

// Mean of trees (forest / single tree) or init + rate * sum (boosting).
class TreeEnsemble final : public Regressor {
 public:
  enum class Mode { kMean, kBoosted };

  TreeEnsemble(Mode mode, std::vector<RegressionTree> trees, double init, double learning_rate)
      : mode_(mode), trees_(std::move(trees)), init_(init), learning_rate_(learning_rate) {}

  void PredictBatch(const Eigen::MatrixXd& rows, Eigen::VectorXd& out) const override {
    out.resize(rows.rows());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      double sum = 0.0;
      for (const auto& t : trees_) sum += t.PredictRow(rows, r);
      out(r) = mode_ == Mode::kMean ? sum / static_cast<double>(trees_.size())
                                    : init_ + learning_rate_ * sum;
    }
  }

  json ToJson() const override {
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(t.ToJson());
    return {{"mode", mode_ == Mode::kMean ? "mean" : "boosted"},
            {"init", init_},
            {"learning_rate", learning_rate_},
            {"trees", trees}};
  }

  static std::shared_ptr<const TreeEnsemble> FromJson(const json& j) {
    std::vector<RegressionTree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(RegressionTree::FromJson(t));
    if (trees.empty()) throw Error(ErrorCode::kMalformedFile, "ensemble without trees");
    const Mode mode = j.at("mode").get<std::string>() == "mean" ? Mode::kMean : Mode::kBoosted;
    return std::make_shared<TreeEnsemble>(mode, std::move(trees), j.at("init").get<double>(),
                                          j.at("learning_rate").get<double>());
  }

 private:
  Mode mode_;
  std::vector<RegressionTree> trees_;
  double init_;
  double learning_rate_;
};

// AdaBoost.R2 combination: weighted median of estimator predictions.
class AdaBoostEnsemble final : public Regressor {
 public:
  AdaBoostEnsemble(std::vector<std::shared_ptr<const Regressor>> estimators,
                   std::vector<double> weights)
      : estimators_(std::move(estimators)), weights_(std::move(weights)) {}

  void PredictBatch(const Eigen::MatrixXd& rows, Eigen::VectorXd& out) const override {
    const std::size_t k = estimators_.size();
    Eigen::MatrixXd all(rows.rows(), static_cast<Eigen::Index>(k));
    Eigen::VectorXd column;
    for (std::size_t e = 0; e < k; ++e) {
      estimators_[e]->PredictBatch(rows, column);
      all.col(static_cast<Eigen::Index>(e)) = column;
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    out.resize(rows.rows());
    std::vector<std::size_t> order(k);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return all(r, static_cast<Eigen::Index>(a)) < all(r, static_cast<Eigen::Index>(b));
      });
      double cumulative = 0.0;
      std::size_t pick = order.back();
      for (std::size_t idx : order) {
        cumulative += weights_[idx];
        if (cumulative >= 0.5 * total) {
          pick = idx;
          break;
        }
      }
      out(r) = all(r, static_cast<Eigen::Index>(pick));
    }
  }

  json ToJson() const override {
    json estimators = json::array();
    for (const auto& e : estimators_) estimators.push_back(e->ToJson());
    return {{"estimator_weights", weights_}, {"estimators", estimators}};
  }

  static std::shared_ptr<const AdaBoostEnsemble> FromJson(const json& j) {
    std::vector<std::shared_ptr<const Regressor>> estimators;
    for (const auto& e : j.at("estimators")) estimators.push_back(TreeEnsemble::FromJson(e));
    auto weights = j.at("estimator_weights").get<std::vector<double>>();
    if (estimators.empty() || weights.size() != estimators.size()) {
      throw Error(ErrorCode::kMalformedFile, "inconsistent AdaBoost state");
    }
    return std::make_shared<AdaBoostEnsemble>(std::move(estimators), std::move(weights));
  }

 private:
  std::vector<std::shared_ptr<const Regressor>> estimators_;
  std::vector<double> weights_;
};

int AsInt(double v) { return static_cast<int>(std::llround(v)); }

TreeParams TreeParamsFrom(const ModelSpec& spec) {
  TreeParams p;
  p.max_depth = AsInt(spec.Get("max_depth"));
  p.min_samples_split = std::max(2, AsInt(spec.Get("min_samples_split")));
  p.min_samples_leaf = std::max(1, AsInt(spec.Get("min_samples_leaf")));
  p.max_features = AsInt(spec.Get("max_features"));
  return p;
}

std::vector<double> WeightsOrOnes(const Eigen::VectorXd* weights, Eigen::Index n) {
  if (weights == nullptr) return std::vector<double>(static_cast<std::size_t>(n), 1.0);
  if (weights->size() != n) throw Error(ErrorCode::kLengthMismatch, "weights vs rows");
  return {weights->data(), weights->data() + n};
}

// Seed used when the spec carries none: fresh entropy, so the fit is not
// reproducible.
uint64_t SeedOrEntropy(const ModelSpec& spec) {
  if (spec.seed()) return *spec.seed();
  std::random_device device;
  return (static_cast<uint64_t>(device()) << 32) ^ device();
}

}  // namespace

FitResult FitDecisionTree(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                          const Eigen::VectorXd& labels, const Eigen::VectorXd* weights) {
  const TreeParams params = TreeParamsFrom(spec);
  const auto w = WeightsOrOnes(weights, rows.rows());
  Rng rng(SeedOrEntropy(spec), 0);
  std::vector<RegressionTree> trees;
  trees.push_back(RegressionTree::Fit(rows, labels, w, params, &rng));
  return {std::make_shared<TreeEnsemble>(TreeEnsemble::Mode::kMean, std::move(trees), 0.0, 1.0),
          {}};
}

FitResult FitRandomForest(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                          const Eigen::VectorXd& labels, const Eigen::VectorXd* weights,
                          const FitOptions& options) {
  TreeParams params = TreeParamsFrom(spec);
  if (params.max_features < 0) {
    params.max_features =
        std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(rows.cols())))));
  }
  const int n_trees = std::max(1, AsInt(spec.Get("n_estimators")));
  const bool bootstrap = spec.Get("bootstrap") != 0.0;
  const auto base_weights = WeightsOrOnes(weights, rows.rows());
  const uint64_t seed = SeedOrEntropy(spec);
  const auto n = static_cast<std::size_t>(rows.rows());

  std::vector<std::optional<RegressionTree>> trees(static_cast<std::size_t>(n_trees));
  ParallelFor(trees.size(), options.workers, [&](std::size_t t) {
    Rng rng(seed, t);
    std::vector<double> w = base_weights;
    if (bootstrap) {
      std::vector<double> counts(n, 0.0);
      for (std::size_t draw = 0; draw < n; ++draw) counts[rng.Below(n)] += 1.0;
      for (std::size_t i = 0; i < n; ++i) w[i] *= counts[i];
    }
    trees[t] = RegressionTree::Fit(rows, labels, w, params, &rng);
  });
  std::vector<RegressionTree> fitted;
  for (auto& t : trees) fitted.push_back(std::move(*t));
  return {std::make_shared<TreeEnsemble>(TreeEnsemble::Mode::kMean, std::move(fitted), 0.0, 1.0),
          {}};
}

FitResult FitGradientBoosting(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                              const Eigen::VectorXd& labels, const Eigen::VectorXd* weights) {
  TreeParams params;
  params.max_depth = AsInt(spec.Get("max_depth"));
  params.min_samples_leaf = std::max(1, AsInt(spec.Get("min_samples_leaf")));
  const int stages = std::max(1, AsInt(spec.Get("n_estimators")));
  const double rate = spec.Get("learning_rate");
  const double subsample = spec.Get("subsample");
  const auto base_weights = WeightsOrOnes(weights, rows.rows());
  const auto n = static_cast<std::size_t>(rows.rows());

  double weight_sum = 0.0, init = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weight_sum += base_weights[i];
    init += base_weights[i] * labels(static_cast<Eigen::Index>(i));
  }
  init /= weight_sum;

  const uint64_t seed = subsample < 1.0 ? SeedOrEntropy(spec) : 0;
  Eigen::VectorXd current = Eigen::VectorXd::Constant(rows.rows(), init);
  std::vector<RegressionTree> trees;
  for (int stage = 0; stage < stages; ++stage) {
    const Eigen::VectorXd residual = labels - current;
    std::vector<double> w = base_weights;
    Rng rng(seed, static_cast<uint64_t>(stage));
    if (subsample < 1.0) {
      const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(subsample * n));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t k = 0; k < keep; ++k) std::swap(perm[k], perm[k + rng.Below(n - k)]);
      std::vector<double> masked(n, 0.0);
      for (std::size_t k = 0; k < keep; ++k) masked[perm[k]] = w[perm[k]];
      w.swap(masked);
    }
    trees.push_back(RegressionTree::Fit(rows, residual, w, params, &rng));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      current(r) += rate * trees.back().PredictRow(rows, r);
    }
  }
  return {std::make_shared<TreeEnsemble>(TreeEnsemble::Mode::kBoosted, std::move(trees), init,
                                         rate),
          {}};
}

FitResult FitAdaBoostR2(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                        const Eigen::VectorXd& labels, const FitOptions& options) {
  const ModelSpec& base = *spec.base();
  const int rounds = std::max(1, AsInt(spec.Get("n_estimators")));
  const double rate = spec.Get("learning_rate");
  const uint64_t seed = SeedOrEntropy(spec);
  const auto n = rows.rows();

  // Weights are kept normalized to sum n so the first round is an ordinary
  // unweighted fit of the base learner.
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(n);
  std::vector<std::shared_ptr<const Regressor>> estimators;
  std::vector<double> estimator_weights;
  std::vector<std::string> warnings;
  for (int round = 0; round < rounds; ++round) {
    const ModelSpec round_spec = base.WithSeed(seed + static_cast<uint64_t>(round));
    FitResult fitted = FitRegressor(round_spec, rows, labels, &weights, options);
    Eigen::VectorXd predictions;
    fitted.regressor->PredictBatch(rows, predictions);
    const Eigen::VectorXd error = (predictions - labels).cwiseAbs();
    const double max_error = error.maxCoeff();
    if (max_error <= 0.0) {
      estimators.push_back(fitted.regressor);
      estimator_weights.push_back(1.0);
      break;
    }
    const Eigen::VectorXd loss = error / max_error;
    const double average_loss = weights.dot(loss) / weights.sum();
    if (average_loss >= 0.5) {
      if (estimators.empty()) {
        estimators.push_back(fitted.regressor);
        estimator_weights.push_back(1.0);
      }
      warnings.push_back("AdaBoostR2 stopped after " + std::to_string(estimators.size()) +
                         " rounds: average loss reached 0.5");
      break;
    }
    const double beta = average_loss / (1.0 - average_loss);
    estimators.push_back(fitted.regressor);
    estimator_weights.push_back(rate * std::log(1.0 / beta));
    if (round + 1 == rounds) break;
    for (Eigen::Index i = 0; i < n; ++i) {
      weights(i) *= std::pow(beta, rate * (1.0 - loss(i)));
    }
    weights *= static_cast<double>(n) / weights.sum();
  }
  return {std::make_shared<AdaBoostEnsemble>(std::move(estimators), std::move(estimator_weights)),
          std::move(warnings)};
}

std::shared_ptr<const Regressor> TreeModelFromJson(const ModelSpec& spec, const json& state) {
  if (spec.kind() == ModelKind::kAdaBoostR2) return AdaBoostEnsemble::FromJson(state);
  return TreeEnsemble::FromJson(state);
}

}  // namespace adsorbxai::detail
