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

#include "adsorbxai/shapley.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>

#include "adsorbxai/csv.h"
#include "adsorbxai/error.h"
#include "adsorbxai/parallel.h"
#include "adsorbxai/random.h"

namespace adsorbxai {
namespace {

// Composite rows predicted per batch in marginal mode.
constexpr std::size_t kMarginalBatchRows = 1 << 16;

std::vector<double> WeightTable(std::size_t f) {
  std::vector<double> w(f);
  for (std::size_t s = 0; s < f; ++s) w[s] = CoalitionWeight(f, s);
  return w;
}

// phi_i = sum over coalitions S without i of w(|S|) (v(S + i) - v(S)).
Eigen::RowVectorXd ComputePhi(const std::vector<double>& values, const std::vector<double>& weights,
                              std::size_t f) {
  Eigen::RowVectorXd phi(static_cast<Eigen::Index>(f));
  const uint64_t count = uint64_t{1} << f;
  for (std::size_t i = 0; i < f; ++i) {
    const uint64_t bit = uint64_t{1} << i;
    double total = 0.0;
    for (uint64_t mask = 0; mask < count; ++mask) {
      if (mask & bit) continue;
      total += weights[static_cast<std::size_t>(std::popcount(mask))] *
               (values[mask | bit] - values[mask]);
    }
    phi(static_cast<Eigen::Index>(i)) = total;
  }
  return phi;
}

void CheckFeatureCap(std::size_t f, std::size_t cap) {
  if (f > cap) {
    throw Error(ErrorCode::kTooManyFeatures, std::to_string(f) +
                                                 " features exceed the enumeration cap of " +
                                                 std::to_string(cap));
  }
  if (f == 0) throw Error(ErrorCode::kInvalidArgument, "no features to attribute");
}

}  // namespace

double CoalitionWeight(std::size_t num_features, std::size_t subset_size) {
  if (num_features == 0 || subset_size >= num_features) {
    throw Error(ErrorCode::kOutOfRange, "coalition size " + std::to_string(subset_size) +
                                            " is outside [0, " +
                                            std::to_string(num_features) + ")");
  }
  const auto f = static_cast<double>(num_features);
  const auto s = static_cast<double>(subset_size);
  return std::exp(std::lgamma(s + 1.0) + std::lgamma(f - s) - std::lgamma(f + 1.0));
}

std::string_view ShapleyModeName(ShapleyMode mode) {
  return mode == ShapleyMode::kRetrain ? "retrain" : "marginal";
}

Eigen::MatrixXd SelectBackground(const Eigen::MatrixXd& rows, std::size_t cap, uint64_t seed) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (cap == 0 || n <= cap) return rows;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0xb6);
  for (std::size_t i = 0; i < cap; ++i) std::swap(order[i], order[i + rng.Below(n - i)]);
  order.resize(cap);
  std::sort(order.begin(), order.end());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(cap), rows.cols());
  for (std::size_t i = 0; i < cap; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(order[i]));
  }
  return out;
}

ShapleyReport ShapleyMarginal(const BatchPredictor& predict, const Eigen::MatrixXd& queries,
                              const Eigen::MatrixXd& background,
                              const MarginalOptions& options) {
  const auto f = static_cast<std::size_t>(background.cols());
  CheckFeatureCap(f, options.max_features);
  if (background.rows() == 0) throw Error(ErrorCode::kEmptyDataset, "empty background");
  if (queries.cols() != background.cols()) {
    throw Error(ErrorCode::kArityMismatch, "query rows have " + std::to_string(queries.cols()) +
                                               " columns, background has " +
                                               std::to_string(f));
  }
  const auto b = static_cast<std::size_t>(background.rows());
  const uint64_t coalitions = uint64_t{1} << f;
  const std::size_t per_batch = std::max<std::size_t>(1, kMarginalBatchRows / b);
  const std::vector<double> weights = WeightTable(f);

  ShapleyReport report;
  report.mode = ShapleyMode::kMarginal;
  report.background_size = b;
  report.base_value = predict(background).mean();
  report.phi.resize(queries.rows(), static_cast<Eigen::Index>(f));
  report.predictions.resize(queries.rows());

  ParallelFor(static_cast<std::size_t>(queries.rows()), options.workers, [&](std::size_t q) {
    const Eigen::RowVectorXd x = queries.row(static_cast<Eigen::Index>(q));
    std::vector<double> values(coalitions);
    values[0] = report.base_value;
    Eigen::MatrixXd composite;
    for (uint64_t first = 1; first < coalitions; first += per_batch) {
      const uint64_t last = std::min<uint64_t>(coalitions, first + per_batch);
      composite.resize(static_cast<Eigen::Index>((last - first) * b), background.cols());
      for (uint64_t mask = first; mask < last; ++mask) {
        auto block = composite.middleRows(static_cast<Eigen::Index>((mask - first) * b),
                                          static_cast<Eigen::Index>(b));
        block = background;
        for (std::size_t i = 0; i < f; ++i) {
          if (mask >> i & 1) block.col(static_cast<Eigen::Index>(i)).setConstant(x(static_cast<Eigen::Index>(i)));
        }
      }
      const Eigen::VectorXd preds = predict(composite);
      for (uint64_t mask = first; mask < last; ++mask) {
        values[mask] = preds.segment(static_cast<Eigen::Index>((mask - first) * b),
                                     static_cast<Eigen::Index>(b))
                           .mean();
      }
    }
    report.predictions(static_cast<Eigen::Index>(q)) = values[coalitions - 1];
    report.phi.row(static_cast<Eigen::Index>(q)) = ComputePhi(values, weights, f);
  });
  return report;
}

ShapleyReport ShapleyMarginal(const TrainedModel& model, const Eigen::MatrixXd& queries,
                              const Eigen::MatrixXd& background,
                              const MarginalOptions& options) {
  if (static_cast<std::size_t>(background.cols()) != model.num_features()) {
    throw Error(ErrorCode::kArityMismatch, "background arity does not match the model");
  }
  ShapleyReport report = ShapleyMarginal(
      [&model](const Eigen::MatrixXd& rows) { return model.Predict(rows); }, queries, background,
      options);
  report.feature_names = model.feature_names();
  return report;
}

// ---------------------------------------------------------------------------

struct RetrainExplainer::SubsetModel {
  std::vector<std::size_t> columns;
  std::optional<TrainedModel> model;  // empty for the empty coalition
};

RetrainExplainer::RetrainExplainer(ModelSpec spec, TabularDataset train, RetrainOptions options)
    : spec_(std::move(spec)), train_(std::move(train)), options_(std::move(options)) {
  CheckFeatureCap(train_.num_features(), std::min<std::size_t>(options_.max_features, 63));
  if (train_.empty()) throw Error(ErrorCode::kEmptyDataset, "empty training set");
  if (spec_.IsRandomized() && !spec_.seed()) {
    throw Error(ErrorCode::kInvalidArgument,
                "retrain mode needs a seed for randomized model spec " + spec_.ToString());
  }
  label_mean_ = train_.labels.mean();
}

std::size_t RetrainExplainer::cached_models() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

void RetrainExplainer::EnsureAllSubsets() {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::size_t f = train_.num_features();
  const uint64_t count = uint64_t{1} << f;
  std::vector<uint64_t> missing;
  for (uint64_t mask = 0; mask < count; ++mask) {
    if (!cache_.contains(mask)) missing.push_back(mask);
  }
  if (missing.empty()) return;
  std::vector<std::shared_ptr<const SubsetModel>> fitted(missing.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  ParallelFor(missing.size(), options_.fit.workers, [&](std::size_t k) {
    auto entry = std::make_shared<SubsetModel>();
    for (std::size_t i = 0; i < f; ++i) {
      if (missing[k] >> i & 1) entry->columns.push_back(i);
    }
    if (!entry->columns.empty()) {
      FitOptions inner;  // subsets already run in parallel
      entry->model.emplace(Fit(spec_, train_.SelectColumns(entry->columns), inner));
    }
    fitted[k] = std::move(entry);
    const std::size_t completed = done.fetch_add(1) + 1;
    if (options_.progress) {
      std::lock_guard<std::mutex> plock(progress_mutex);
      options_.progress(completed, missing.size());
    }
  });
  for (std::size_t k = 0; k < missing.size(); ++k) cache_.emplace(missing[k], std::move(fitted[k]));
}

double RetrainExplainer::SubsetValue(uint64_t mask, const Eigen::RowVectorXd& query) const {
  std::shared_ptr<const SubsetModel> entry;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    entry = cache_.at(mask);
  }
  if (!entry->model) return label_mean_;
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(entry->columns.size()));
  for (std::size_t k = 0; k < entry->columns.size(); ++k) {
    row(0, static_cast<Eigen::Index>(k)) = query(static_cast<Eigen::Index>(entry->columns[k]));
  }
  return entry->model->Predict(row)(0);
}

ShapleyReport RetrainExplainer::Explain(const Eigen::MatrixXd& queries) {
  const std::size_t f = train_.num_features();
  if (static_cast<std::size_t>(queries.cols()) != f) {
    throw Error(ErrorCode::kArityMismatch, "query rows have " + std::to_string(queries.cols()) +
                                               " columns, expected " + std::to_string(f));
  }
  EnsureAllSubsets();
  const uint64_t count = uint64_t{1} << f;
  const std::vector<double> weights = WeightTable(f);
  ShapleyReport report;
  report.mode = ShapleyMode::kRetrain;
  report.feature_names = train_.feature_names;
  report.base_value = label_mean_;
  report.phi.resize(queries.rows(), static_cast<Eigen::Index>(f));
  report.predictions.resize(queries.rows());
  ParallelFor(static_cast<std::size_t>(queries.rows()), options_.fit.workers, [&](std::size_t q) {
    const Eigen::RowVectorXd x = queries.row(static_cast<Eigen::Index>(q));
    std::vector<double> values(count);
    for (uint64_t mask = 0; mask < count; ++mask) values[mask] = SubsetValue(mask, x);
    report.predictions(static_cast<Eigen::Index>(q)) = values[count - 1];
    report.phi.row(static_cast<Eigen::Index>(q)) = ComputePhi(values, weights, f);
  });
  return report;
}

ShapleyReport ShapleyRetrain(const ModelSpec& spec, const TabularDataset& train,
                             const Eigen::MatrixXd& queries, const RetrainOptions& options) {
  RetrainExplainer explainer(spec, train, options);
  return explainer.Explain(queries);
}

// ---------------------------------------------------------------------------

GlobalImportance ComputeGlobalImportance(const ShapleyReport& report) {
  if (report.phi.rows() == 0) throw Error(ErrorCode::kEmptyDataset, "empty Shapley report");
  GlobalImportance out;
  out.feature_names = report.feature_names;
  out.mean_abs_phi = report.phi.cwiseAbs().colwise().mean().transpose();
  out.ranking.resize(static_cast<std::size_t>(report.phi.cols()));
  std::iota(out.ranking.begin(), out.ranking.end(), 0);
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
    return out.mean_abs_phi(static_cast<Eigen::Index>(a)) >
           out.mean_abs_phi(static_cast<Eigen::Index>(b));
  });
  return out;
}

std::string WriteImportanceCsv(const GlobalImportance& importance) {
  std::string out = "feature,mean_abs_phi,rank\n";
  for (std::size_t r = 0; r < importance.ranking.size(); ++r) {
    const std::size_t j = importance.ranking[r];
    out += csv::JoinRow({importance.feature_names.at(j),
                         csv::FormatDouble(importance.mean_abs_phi(static_cast<Eigen::Index>(j))),
                         std::to_string(r + 1)});
    out += '\n';
  }
  return out;
}

std::vector<BeeswarmRow> BeeswarmExport(const ShapleyReport& report,
                                        const TabularDataset& dataset) {
  if (report.phi.rows() != dataset.rows.rows() || report.phi.cols() != dataset.rows.cols()) {
    throw Error(ErrorCode::kRowMismatch,
                "report is " + std::to_string(report.phi.rows()) + "x" +
                    std::to_string(report.phi.cols()) + " but dataset is " +
                    std::to_string(dataset.rows.rows()) + "x" + std::to_string(dataset.rows.cols()));
  }
  std::vector<BeeswarmRow> out;
  out.reserve(static_cast<std::size_t>(report.phi.size()));
  for (Eigen::Index j = 0; j < dataset.rows.cols(); ++j) {
    const double lo = dataset.rows.col(j).minCoeff();
    const double hi = dataset.rows.col(j).maxCoeff();
    for (Eigen::Index i = 0; i < dataset.rows.rows(); ++i) {
      const double v = dataset.rows(i, j);
      out.push_back({dataset.feature_names[static_cast<std::size_t>(j)],
                     dataset.system_ids.empty() ? std::to_string(i)
                                                : dataset.system_ids[static_cast<std::size_t>(i)],
                     v, report.phi(i, j), hi > lo ? (v - lo) / (hi - lo) : 0.5});
    }
  }
  return out;
}

std::string WriteBeeswarmCsv(std::span<const BeeswarmRow> rows) {
  std::string out = "feature,system_id,feature_value,phi,value_norm\n";
  for (const BeeswarmRow& r : rows) {
    out += csv::JoinRow({r.feature, r.system_id, csv::FormatDouble(r.feature_value),
                         csv::FormatDouble(r.phi), csv::FormatDouble(r.value_norm)});
    out += '\n';
  }
  return out;
}

std::string WriteAttributionCsv(const ShapleyReport& report, std::span<const BeeswarmRow> rows) {
  std::string out = "system_id,feature,phi,feature_value,value_norm,mode,base_value\n";
  const std::string mode(ShapleyModeName(report.mode));
  const std::string base = csv::FormatDouble(report.base_value);
  for (const BeeswarmRow& r : rows) {
    out += csv::JoinRow({r.system_id, r.feature, csv::FormatDouble(r.phi),
                         csv::FormatDouble(r.feature_value), csv::FormatDouble(r.value_norm), mode,
                         base});
    out += '\n';
  }
  return out;
}

std::string WritePredictionsCsv(const ShapleyReport& report) {
  std::string out = "system_id,prediction\n";
  for (Eigen::Index i = 0; i < report.predictions.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out += csv::JoinRow({k < report.system_ids.size() ? report.system_ids[k] : std::to_string(i),
                         csv::FormatDouble(report.predictions(i))});
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd CorrelationMatrix(const TabularDataset& dataset) {
  const Eigen::Index n = dataset.rows.rows();
  const Eigen::Index f = dataset.rows.cols();
  if (n < 2) throw Error(ErrorCode::kTooFewRows, "correlation needs at least two rows");
  Eigen::MatrixXd centered = dataset.rows.rowwise() - dataset.rows.colwise().mean();
  std::vector<bool> constant(static_cast<std::size_t>(f));
  for (Eigen::Index j = 0; j < f; ++j) {
    constant[static_cast<std::size_t>(j)] =
        dataset.rows.col(j).maxCoeff() == dataset.rows.col(j).minCoeff();
  }
  const Eigen::VectorXd ss = centered.colwise().squaredNorm().transpose();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(f, f);
  for (Eigen::Index a = 0; a < f; ++a) {
    for (Eigen::Index b = a + 1; b < f; ++b) {
      double v = 0.0;
      if (!constant[static_cast<std::size_t>(a)] && !constant[static_cast<std::size_t>(b)]) {
        v = std::clamp(centered.col(a).dot(centered.col(b)) / std::sqrt(ss(a) * ss(b)), -1.0, 1.0);
      }
      r(a, b) = r(b, a) = v;
    }
  }
  return r;
}

std::string WriteCorrelationCsv(const std::vector<std::string>& feature_names,
                                const Eigen::MatrixXd& correlation) {
  std::vector<std::string> header{"feature"};
  header.insert(header.end(), feature_names.begin(), feature_names.end());
  std::string out = csv::JoinRow(header) + '\n';
  for (Eigen::Index i = 0; i < correlation.rows(); ++i) {
    std::vector<std::string> row{feature_names.at(static_cast<std::size_t>(i))};
    for (Eigen::Index j = 0; j < correlation.cols(); ++j) {
      row.push_back(csv::FormatDouble(correlation(i, j)));
    }
    out += csv::JoinRow(row) + '\n';
  }
  return out;
}

ScatterTable ScatterExport(const TabularDataset& dataset, std::string_view x_feature,
                           std::string_view y_feature, std::string_view color_feature) {
  const std::array<std::size_t, 3> cols = {dataset.RequireFeature(x_feature),
                                           dataset.RequireFeature(y_feature),
                                           dataset.RequireFeature(color_feature)};
  ScatterTable t;
  t.column_names = {std::string(x_feature), std::string(y_feature), std::string(color_feature)};
  t.system_ids = dataset.system_ids;
  t.values.resize(dataset.rows.rows(), 3);
  for (Eigen::Index k = 0; k < 3; ++k) {
    t.values.col(k) = dataset.rows.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(k)]));
  }
  return t;
}

std::string WriteScatterCsv(const ScatterTable& table) {
  std::string out = csv::JoinRow({"system_id", table.column_names[0], table.column_names[1],
                                  table.column_names[2]}) +
                    '\n';
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out += csv::JoinRow({k < table.system_ids.size() ? table.system_ids[k] : std::to_string(i),
                         csv::FormatDouble(table.values(i, 0)), csv::FormatDouble(table.values(i, 1)),
                         csv::FormatDouble(table.values(i, 2))});
    out += '\n';
  }
  return out;
}

}  // namespace adsorbxai
