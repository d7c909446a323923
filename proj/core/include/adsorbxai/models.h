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

#ifndef ADSORBXAI_MODELS_H_
#define ADSORBXAI_MODELS_H_

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adsorbxai/dataset.h"

namespace adsorbxai {

// ---------------------------------------------------------------------------
// Splitting and scaling

struct SplitSpec {
  double train_fraction = 0.8;
  uint64_t seed = 0;
  bool shuffle = true;

  void Validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// train gets floor(train_fraction * n) rows of a seeded permutation.
// Throws Error(kTooFewRows) for n < 5.
SplitIndices MakeSplit(std::size_t n, const SplitSpec& spec);
std::pair<TabularDataset, TabularDataset> Split(const TabularDataset& dataset,
                                                const SplitSpec& spec);

class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-12;

  Standardizer() = default;
  Standardizer(Eigen::VectorXd means, Eigen::VectorXd std_devs);

  // Population statistics of the columns of `rows`.
  static Standardizer Fit(const Eigen::MatrixXd& rows);

  Eigen::MatrixXd Transform(const Eigen::MatrixXd& rows) const;
  Eigen::MatrixXd InverseTransform(const Eigen::MatrixXd& rows) const;

  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& std_devs() const { return std_devs_; }

 private:
  Eigen::VectorXd means_;
  Eigen::VectorXd std_devs_;
};

// ---------------------------------------------------------------------------
// Model specifications

enum class ModelKind {
  kDecisionTree,
  kRandomForest,
  kAdaBoostR2,
  kGradientBoosting,
  kKernelRidge,
  kLasso,
};

std::string_view ModelKindName(ModelKind kind);
std::optional<ModelKind> ParseModelKind(std::string_view name);
std::vector<ModelKind> AllModelKinds();

using Hyperparameters = std::map<std::string, double>;

// Kind plus hyperparameter overrides. Keys not accepted by the kind are
// rejected at construction; unset keys fall back to documented defaults.
//
//   decision_tree      max_depth(-1=unbounded) min_samples_split(2)
//                      min_samples_leaf(1) max_features(0=all)
//   random_forest      n_estimators(100) bootstrap(1) max_features(-1=floor(sqrt F))
//                      + decision_tree keys
//   adaboost_r2        n_estimators(50) learning_rate(1); base learner in `base`
//                      (random_forest by default)
//   gradient_boosting  n_estimators(200) max_depth(3) learning_rate(0.1)
//                      min_samples_leaf(1) subsample(1)
//   kernel_ridge       alpha(1e-2) gamma(0=1/(F*median sq. distance))
//                      kernel(0=rbf, 1=linear)
//   lasso              lambda(-1=5-fold CV) cv_folds(5) cv_grid(20)
//                      tol(1e-10) max_iter(100000)
class ModelSpec {
 public:
  ModelSpec(ModelKind kind, Hyperparameters hyperparameters = {},
            std::optional<uint64_t> seed = std::nullopt,
            std::shared_ptr<const ModelSpec> base = nullptr);

  // "kind[:key=value]..." e.g. "random_forest:n_estimators=20:max_depth=6".
  // For adaboost_r2, "base=decision_tree" picks the base learner and
  // "base.key=value" forwards hyperparameters to it. kernel accepts
  // "rbf"/"linear".
  static ModelSpec Parse(std::string_view text, std::optional<uint64_t> seed = std::nullopt);

  ModelKind kind() const { return kind_; }
  const Hyperparameters& hyperparameters() const { return hyperparameters_; }
  std::optional<uint64_t> seed() const { return seed_; }
  // AdaBoost base learner; null for other kinds.
  const ModelSpec* base() const { return base_.get(); }

  double Get(const std::string& key) const;
  ModelSpec WithSeed(std::optional<uint64_t> seed) const;

  // True when fitting draws random numbers (bootstrap, feature subsampling,
  // row subsampling).
  bool IsRandomized() const;

  // Canonical text form accepted by Parse (seed excluded).
  std::string ToString() const;

 private:
  ModelKind kind_;
  Hyperparameters hyperparameters_;
  std::optional<uint64_t> seed_;
  std::shared_ptr<const ModelSpec> base_;
};

namespace detail {
class Regressor;
}

// ---------------------------------------------------------------------------
// Fitted models

struct FitOptions {
  unsigned workers = 1;
};

class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, std::vector<std::string> feature_names,
               std::shared_ptr<const detail::Regressor> regressor,
               std::vector<std::string> warnings = {});

  const ModelSpec& spec() const { return spec_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::size_t num_features() const { return feature_names_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // One prediction per row. Throws Error(kArityMismatch).
  Eigen::VectorXd Predict(const Eigen::MatrixXd& rows) const;
  double PredictRow(std::span<const double> row) const;

  // Lasso only: coefficients and intercept in raw feature units.
  std::optional<std::pair<Eigen::VectorXd, double>> LinearCoefficients() const;

  // Free-form key/value annotations persisted with the model (e.g. the split
  // used for training).
  std::map<std::string, std::string>& annotations() { return annotations_; }
  const std::map<std::string, std::string>& annotations() const { return annotations_; }

  const detail::Regressor& regressor() const { return *regressor_; }

 private:
  ModelSpec spec_;
  std::vector<std::string> feature_names_;
  std::shared_ptr<const detail::Regressor> regressor_;
  std::vector<std::string> warnings_;
  std::map<std::string, std::string> annotations_;
};

// Throws Error(kInvalidArgument) on an empty training set, Error(kSingularKernel)
// when kernel ridge cannot factorize after jitter escalation. Lasso
// non-convergence is reported in TrainedModel::warnings().
TrainedModel Fit(const ModelSpec& spec, const TabularDataset& train,
                 const FitOptions& options = {});

Eigen::VectorXd Predict(const TrainedModel& model, const Eigen::MatrixXd& rows);

// Mean absolute difference. Throws Error(kLengthMismatch).
double MeanAbsoluteError(const Eigen::VectorXd& predictions, const Eigen::VectorXd& labels);

// ---------------------------------------------------------------------------
// Benchmarking

struct BenchmarkRow {
  std::string model;
  double mean_mae;
  double std_mae;  // sample standard deviation, 0 for one repeat
  int repeats;
  uint64_t seed;
};

struct BenchmarkOptions {
  // Re-split with seed+i on repeat i (default) or keep the split fixed and
  // vary the model seed instead.
  bool vary_model_seed = false;
  FitOptions fit;
};

// Sorted ascending by mean MAE (ties by model name).
std::vector<BenchmarkRow> RunBenchmark(const TabularDataset& dataset,
                                       std::span<const ModelSpec> specs, const SplitSpec& split,
                                       int repeats, const BenchmarkOptions& options = {});

// Header: model,mean_mae,std_mae,repeats,seed.
std::string WriteBenchmarkCsv(std::span<const BenchmarkRow> rows);

// ---------------------------------------------------------------------------
// Persistence

inline constexpr int kModelFormatVersion = 1;

std::string SaveModelJson(const TrainedModel& model);
// Throws Error(kFormatVersion) for documents of another format version.
TrainedModel LoadModelJson(std::string_view text);

}  // namespace adsorbxai

#endif  // ADSORBXAI_MODELS_H_
