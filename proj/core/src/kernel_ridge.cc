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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "adsorbxai/error.h"
#include "regressor.h"

namespace adsorbxai::detail {
namespace {

using nlohmann::json;

enum class Kernel { kRbf = 0, kLinear = 1 };

Eigen::MatrixXd KernelMatrix(Kernel kernel, double gamma, const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k = a * b.transpose();
  if (kernel == Kernel::kLinear) return k;
  const Eigen::VectorXd a_sq = a.rowwise().squaredNorm();
  const Eigen::VectorXd b_sq = b.rowwise().squaredNorm();
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      const double d2 = std::max(0.0, a_sq(i) + b_sq(j) - 2.0 * k(i, j));
      k(i, j) = std::exp(-gamma * d2);
    }
  }
  return k;
}

// 1 / (F * median squared pairwise distance) over standardized rows.
double MedianHeuristicGamma(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d2.push_back((x.row(i) - x.row(j)).squaredNorm());
  }
  const double features = static_cast<double>(std::max<Eigen::Index>(1, x.cols()));
  if (d2.empty()) return 1.0 / features;
  auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  const double median = *mid;
  return median > 0.0 ? 1.0 / (features * median) : 1.0 / features;
}

class KernelRidgeRegressor final : public Regressor {
 public:
  KernelRidgeRegressor(Kernel kernel, double gamma, double alpha, Standardizer scaler,
                       Eigen::MatrixXd support, Eigen::VectorXd dual, double offset)
      : kernel_(kernel),
        gamma_(gamma),
        alpha_(alpha),
        scaler_(std::move(scaler)),
        support_(std::move(support)),
        dual_(std::move(dual)),
        offset_(offset) {}

  void PredictBatch(const Eigen::MatrixXd& rows, Eigen::VectorXd& out) const override {
    const Eigen::MatrixXd z = scaler_.Transform(rows);
    out = KernelMatrix(kernel_, gamma_, z, support_) * dual_;
    out.array() += offset_;
  }

  json ToJson() const override {
    return {{"kernel", kernel_ == Kernel::kRbf ? "rbf" : "linear"},
            {"gamma", gamma_},
            {"alpha", alpha_},
            {"means", EigenToJson(scaler_.means())},
            {"std_devs", EigenToJson(scaler_.std_devs())},
            {"support", EigenToJson(support_)},
            {"dual", EigenToJson(dual_)},
            {"offset", offset_}};
  }

 private:
  Kernel kernel_;
  double gamma_;
  double alpha_;
  Standardizer scaler_;
  Eigen::MatrixXd support_;
  Eigen::VectorXd dual_;
  double offset_;
};

}  // namespace

FitResult FitKernelRidge(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                         const Eigen::VectorXd& labels) {
  const Kernel kernel = spec.Get("kernel") != 0.0 ? Kernel::kLinear : Kernel::kRbf;
  double alpha = spec.Get("alpha");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel_ridge alpha must be >= 0");

  Standardizer scaler = Standardizer::Fit(rows);
  const Eigen::MatrixXd z = scaler.Transform(rows);
  double gamma = spec.Get("gamma");
  if (kernel == Kernel::kRbf && !(gamma > 0.0)) gamma = MedianHeuristicGamma(z);

  const double offset = labels.mean();
  const Eigen::VectorXd centered = labels.array() - offset;
  const Eigen::MatrixXd k = KernelMatrix(kernel, gamma, z, z);
  const Eigen::Index n = k.rows();

  std::vector<std::string> warnings;
  // Escalate the ridge by 10x up to three times before giving up.
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::MatrixXd regularized = k;
    regularized.diagonal().array() += alpha;
    Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd dual = llt.solve(centered);
      if (dual.allFinite()) {
        if (attempt > 0) {
          warnings.push_back("kernel_ridge: alpha raised to " + std::to_string(alpha) +
                             " to factorize the kernel matrix");
        }
        return {std::make_shared<KernelRidgeRegressor>(kernel, gamma, alpha, std::move(scaler), z,
                                                       std::move(dual), offset),
                std::move(warnings)};
      }
    }
    alpha = alpha > 0.0 ? alpha * 10.0 : 1e-12 * std::max(1.0, k.diagonal().maxCoeff());
  }
  throw Error(ErrorCode::kSingularKernel,
              "kernel matrix of " + std::to_string(n) + " rows is not positive definite");
}

std::shared_ptr<const Regressor> KernelRidgeFromJson(const json& state) {
  const Kernel kernel = state.at("kernel").get<std::string>() == "linear" ? Kernel::kLinear
                                                                          : Kernel::kRbf;
  return std::make_shared<KernelRidgeRegressor>(
      kernel, state.at("gamma").get<double>(), state.at("alpha").get<double>(),
      Standardizer(EigenVectorFromJson(state.at("means")),
                   EigenVectorFromJson(state.at("std_devs"))),
      EigenMatrixFromJson(state.at("support")), EigenVectorFromJson(state.at("dual")),
      state.at("offset").get<double>());
}

}  // namespace adsorbxai::detail
