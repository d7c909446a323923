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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "adsorbxai/error.h"
#include "adsorbxai/random.h"
#include "adsorbxai/symreg.h"

namespace adsorbxai {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

template <typename Objective>
std::pair<std::vector<double>, double> NelderMead(const Objective& f, std::vector<double> x0,
                                                  int max_evals) {
  const std::size_t d = x0.size();
  Simplex s;
  s.points.push_back(x0);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> p = x0;
    p[j] += x0[j] != 0.0 ? 0.1 * std::abs(x0[j]) : 0.05;
    s.points.push_back(std::move(p));
  }
  for (const auto& p : s.points) s.values.push_back(f(p));
  int evals = static_cast<int>(d + 1);

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), trial(d), trial2(d);
  auto blend = [&](double t, const std::vector<double>& from, std::vector<double>& out) {
    for (std::size_t j = 0; j < d; ++j) out[j] = centroid[j] + t * (from[j] - centroid[j]);
  };

  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
    if (s.values[best] == 0.0) break;
    double diameter = 0.0, scale = 1.0;
    for (std::size_t k = 0; k <= d; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        diameter = std::max(diameter, std::abs(s.points[k][j] - s.points[best][j]));
        scale = std::max(scale, std::abs(s.points[best][j]));
      }
    }
    if (diameter <= 1e-13 * scale) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= d; ++k) {
      if (k == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += s.points[k][j] / static_cast<double>(d);
    }
    blend(-1.0, s.points[worst], trial);
    const double fr = f(trial);
    ++evals;
    if (fr < s.values[best]) {
      blend(-2.0, s.points[worst], trial2);
      const double fe = f(trial2);
      ++evals;
      if (fe < fr) {
        s.points[worst] = trial2;
        s.values[worst] = fe;
      } else {
        s.points[worst] = trial;
        s.values[worst] = fr;
      }
      continue;
    }
    if (fr < s.values[second]) {
      s.points[worst] = trial;
      s.values[worst] = fr;
      continue;
    }
    // Contract toward the better of the worst point and its reflection.
    const bool outside = fr < s.values[worst];
    blend(outside ? -0.5 : 0.5, s.points[worst], trial2);
    const double fc = f(trial2);
    ++evals;
    if (fc < (outside ? fr : s.values[worst])) {
      s.points[worst] = trial2;
      s.values[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= d; ++k) {
      if (k == best) continue;
      for (std::size_t j = 0; j < d; ++j) {
        s.points[k][j] = s.points[best][j] + 0.5 * (s.points[k][j] - s.points[best][j]);
      }
      s.values[k] = f(s.points[k]);
      ++evals;
    }
  }
  const auto it = std::min_element(s.values.begin(), s.values.end());
  return {s.points[static_cast<std::size_t>(it - s.values.begin())], *it};
}

double Median(const Eigen::VectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

ConstantFit OptimizeConstants(const Expression& expression, const Eigen::MatrixXd& rows,
                              const Eigen::VectorXd& labels, int restarts, uint64_t seed) {
  const double start_loss = LossMae(expression, rows, labels);
  const std::vector<double> x0 = expression.Constants();
  if (x0.empty()) return {expression, start_loss, false};

  if (expression.complexity() == 1) {
    const Expression candidate = Expression::Constant(Median(labels));
    const double loss = LossMae(candidate, rows, labels);
    if (loss < start_loss) return {candidate, loss, true};
    return {expression, start_loss, false};
  }

  Expression scratch = expression;
  auto objective = [&](const std::vector<double>& c) {
    scratch = expression.WithConstants(c);
    const double loss = LossMae(scratch, rows, labels);
    return std::isnan(loss) ? kInf : loss;
  };
  const int max_evals = 200 * static_cast<int>(x0.size() + 1);

  std::vector<double> best_x = x0;
  double best_loss = start_loss;
  Rng rng(seed, 0xc0de);
  for (int r = 0; r <= std::max(0, restarts); ++r) {
    std::vector<double> start = x0;
    if (r > 0) {
      for (double& c : start) c += (0.5 * std::abs(c) + 0.1) * rng.Normal();
    }
    auto [x, loss] = NelderMead(objective, std::move(start), max_evals);
    if (loss < best_loss) {
      best_loss = loss;
      best_x = std::move(x);
    }
  }
  if (best_loss < start_loss) return {expression.WithConstants(best_x), best_loss, true};
  return {expression, start_loss, false};
}

}  // namespace adsorbxai
