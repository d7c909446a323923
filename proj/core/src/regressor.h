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

// Internal regressor interface shared by the model implementations.

#ifndef ADSORBXAI_SRC_REGRESSOR_H_
#define ADSORBXAI_SRC_REGRESSOR_H_

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsorbxai/models.h"
#include "json.hpp"

namespace adsorbxai::detail {

class Regressor {
 public:
  virtual ~Regressor() = default;

  // rows has the training feature arity; out is resized by the callee.
  virtual void PredictBatch(const Eigen::MatrixXd& rows, Eigen::VectorXd& out) const = 0;
  virtual nlohmann::json ToJson() const = 0;
  virtual std::optional<std::pair<Eigen::VectorXd, double>> Linear() const {
    return std::nullopt;
  }
};

struct FitResult {
  std::shared_ptr<const Regressor> regressor;
  std::vector<std::string> warnings;
};

// weights may be null (all ones). Only tree kinds honour weights; the others
// reject non-null weights.
FitResult FitRegressor(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                       const Eigen::VectorXd& labels, const Eigen::VectorXd* weights,
                       const FitOptions& options);

std::shared_ptr<const Regressor> RegressorFromJson(const ModelSpec& spec,
                                                   const nlohmann::json& state);

// Per-kind entry points.
FitResult FitDecisionTree(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                          const Eigen::VectorXd& labels, const Eigen::VectorXd* weights);
FitResult FitRandomForest(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                          const Eigen::VectorXd& labels, const Eigen::VectorXd* weights,
                          const FitOptions& options);
FitResult FitGradientBoosting(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                              const Eigen::VectorXd& labels, const Eigen::VectorXd* weights);
FitResult FitAdaBoostR2(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                        const Eigen::VectorXd& labels, const FitOptions& options);
FitResult FitKernelRidge(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                         const Eigen::VectorXd& labels);
FitResult FitLasso(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                   const Eigen::VectorXd& labels);

std::shared_ptr<const Regressor> TreeModelFromJson(const ModelSpec& spec,
                                                   const nlohmann::json& state);
std::shared_ptr<const Regressor> KernelRidgeFromJson(const nlohmann::json& state);
std::shared_ptr<const Regressor> LassoFromJson(const nlohmann::json& state);

nlohmann::json EigenToJson(const Eigen::VectorXd& v);
Eigen::VectorXd EigenVectorFromJson(const nlohmann::json& j);
nlohmann::json EigenToJson(const Eigen::MatrixXd& m);
Eigen::MatrixXd EigenMatrixFromJson(const nlohmann::json& j);

}  // namespace adsorbxai::detail

#endif  // ADSORBXAI_SRC_REGRESSOR_H_
