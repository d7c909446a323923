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
#include <limits>
#include <numeric>
#include <vector>

#include "adsorbxai/error.h"
#include "adsorbxai/random.h"
#include "regressor.h"

namespace adsorbxai::detail {
namespace {

using nlohmann::json;

double SoftThreshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

struct CoordinateDescentResult {
  Eigen::VectorXd coef;
  int sweeps;
  bool converged;
};

// Minimizes (1/2n)||y - X b||^2 + lambda ||b||_1 by cyclic coordinate descent.
// X is expected standardized and y centered; `coef` is the warm start.
CoordinateDescentResult CoordinateDescent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                          double lambda, Eigen::VectorXd coef, double tol,
                                          int max_sweeps) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::VectorXd col_sq = x.colwise().squaredNorm().transpose() / n;
  Eigen::VectorXd residual = y - x * coef;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (col_sq(j) <= 0.0) {
        coef(j) = 0.0;
        continue;
      }
      const double rho = x.col(j).dot(residual) / n + col_sq(j) * coef(j);
      const double updated = SoftThreshold(rho, lambda) / col_sq(j);
      const double delta = updated - coef(j);
      if (delta != 0.0) {
        residual -= delta * x.col(j);
        coef(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta <= tol) return {std::move(coef), sweep, true};
  }
  return {std::move(coef), max_sweeps, false};
}

class LassoRegressor final : public Regressor {
 public:
  LassoRegressor(Eigen::VectorXd coef, double intercept, double lambda)
      : coef_(std::move(coef)), intercept_(intercept), lambda_(lambda) {}

  void PredictBatch(const Eigen::MatrixXd& rows, Eigen::VectorXd& out) const override {
    out = rows * coef_;
    out.array() += intercept_;
  }

  json ToJson() const override {
    return {{"coef", EigenToJson(coef_)}, {"intercept", intercept_}, {"lambda", lambda_}};
  }

  std::optional<std::pair<Eigen::VectorXd, double>> Linear() const override {
    return std::make_pair(coef_, intercept_);
  }

 private:
  Eigen::VectorXd coef_;
  double intercept_;
  double lambda_;
};

struct Prepared {
  Standardizer scaler;
  Eigen::MatrixXd x;
  double y_mean;
  Eigen::VectorXd y;
};

Prepared Prepare(const Eigen::MatrixXd& rows, const Eigen::VectorXd& labels) {
  Prepared p;
  p.scaler = Standardizer::Fit(rows);
  p.x = p.scaler.Transform(rows);
  p.y_mean = labels.mean();
  p.y = labels.array() - p.y_mean;
  return p;
}

double SelectLambdaByCv(const Eigen::MatrixXd& rows, const Eigen::VectorXd& labels,
                        const Prepared& full, int folds, int grid_size, double tol,
                        int max_sweeps, uint64_t seed) {
  const auto n = static_cast<double>(full.x.rows());
  const double lambda_max = (full.x.transpose() * full.y).cwiseAbs().maxCoeff() / n;
  if (!(lambda_max > 0.0)) return 0.0;
  grid_size = std::max(1, grid_size);
  std::vector<double> grid;
  for (int k = 0; k < grid_size; ++k) {
    const double exponent = grid_size == 1 ? 0.0 : -3.0 * k / (grid_size - 1);
    grid.push_back(lambda_max * std::pow(10.0, exponent));
  }

  const auto rows_n = static_cast<std::size_t>(rows.rows());
  folds = std::clamp<int>(folds, 2, static_cast<int>(rows_n));
  std::vector<std::size_t> perm(rows_n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed, 0x1a55);
  for (std::size_t i = rows_n; i > 1; --i) std::swap(perm[i - 1], perm[rng.Below(i)]);

  std::vector<double> cv_error(grid.size(), 0.0);
  for (int fold = 0; fold < folds; ++fold) {
    const std::size_t begin = rows_n * static_cast<std::size_t>(fold) / static_cast<std::size_t>(folds);
    const std::size_t end = rows_n * static_cast<std::size_t>(fold + 1) / static_cast<std::size_t>(folds);
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t k = 0; k < rows_n; ++k) {
      (k >= begin && k < end ? val_idx : train_idx).push_back(perm[k]);
    }
    Eigen::MatrixXd train_x(static_cast<Eigen::Index>(train_idx.size()), rows.cols());
    Eigen::VectorXd train_y(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t k = 0; k < train_idx.size(); ++k) {
      train_x.row(static_cast<Eigen::Index>(k)) = rows.row(static_cast<Eigen::Index>(train_idx[k]));
      train_y(static_cast<Eigen::Index>(k)) = labels(static_cast<Eigen::Index>(train_idx[k]));
    }
    const Prepared p = Prepare(train_x, train_y);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(rows.cols());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      coef = CoordinateDescent(p.x, p.y, grid[g], coef, tol, max_sweeps).coef;
      double sse = 0.0;
      for (std::size_t idx : val_idx) {
        const Eigen::RowVectorXd z =
            (rows.row(static_cast<Eigen::Index>(idx)) - p.scaler.means().transpose()).array() /
            p.scaler.std_devs().transpose().array();
        const double residual = labels(static_cast<Eigen::Index>(idx)) - (p.y_mean + z.dot(coef));
        sse += residual * residual;
      }
      cv_error[g] += sse / static_cast<double>(std::max<std::size_t>(1, val_idx.size()));
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (cv_error[g] < cv_error[best]) best = g;
  }
  return grid[best];
}

}  // namespace

FitResult FitLasso(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                   const Eigen::VectorXd& labels) {
  const double tol = spec.Get("tol");
  const int max_sweeps = std::max(1, static_cast<int>(spec.Get("max_iter")));
  const Prepared full = Prepare(rows, labels);
  double lambda = spec.Get("lambda");
  if (lambda < 0.0) {
    lambda = SelectLambdaByCv(rows, labels, full, static_cast<int>(spec.Get("cv_folds")),
                              static_cast<int>(spec.Get("cv_grid")), tol, max_sweeps,
                              spec.seed().value_or(0));
  }
  auto result = CoordinateDescent(full.x, full.y, lambda, Eigen::VectorXd::Zero(rows.cols()), tol,
                                  max_sweeps);
  std::vector<std::string> warnings;
  if (!result.converged) {
    warnings.push_back("NonConvergence: lasso stopped after " + std::to_string(max_sweeps) +
                       " sweeps; returning the last iterate");
  }
  const Eigen::VectorXd coef =
      result.coef.array() / full.scaler.std_devs().array();
  const double intercept = full.y_mean - coef.dot(full.scaler.means());
  return {std::make_shared<LassoRegressor>(coef, intercept, lambda), std::move(warnings)};
}

std::shared_ptr<const Regressor> LassoFromJson(const json& state) {
  return std::make_shared<LassoRegressor>(EigenVectorFromJson(state.at("coef")),
                                          state.at("intercept").get<double>(),
                                          state.at("lambda").get<double>());
}

}  // namespace adsorbxai::detail
