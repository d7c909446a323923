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

// Exact Shapley attribution by coalition enumeration, plus the tabular
// products built on top of it (importance ranking, beeswarm, scatter and
// correlation tables).

#ifndef ADSORBXAI_SHAPLEY_H_
#define ADSORBXAI_SHAPLEY_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adsorbxai/dataset.h"
#include "adsorbxai/models.h"

namespace adsorbxai {

// s! (F - s - 1)! / F!, evaluated through lgamma. Throws Error(kOutOfRange)
// unless 0 <= s <= F - 1.
double CoalitionWeight(std::size_t num_features, std::size_t subset_size);

enum class ShapleyMode { kRetrain, kMarginal };

std::string_view ShapleyModeName(ShapleyMode mode);

struct ShapleyReport {
  ShapleyMode mode = ShapleyMode::kMarginal;
  std::vector<std::string> feature_names;
  std::vector<std::string> system_ids;  // may be empty
  Eigen::MatrixXd phi;                  // samples x features
  Eigen::VectorXd predictions;          // full-coalition value per sample
  double base_value = 0.0;
  std::size_t background_size = 0;      // marginal mode only

  std::size_t size() const { return static_cast<std::size_t>(phi.rows()); }
};

// Maps a batch of rows to one prediction per row.
using BatchPredictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct MarginalOptions {
  std::size_t max_features = 20;
  unsigned workers = 1;
};

// Background for marginal mode: all rows when rows <= cap, otherwise a seeded
// sample of `cap` rows kept in their original order.
inline constexpr std::size_t kDefaultBackgroundCap = 256;
Eigen::MatrixXd SelectBackground(const Eigen::MatrixXd& rows, std::size_t cap, uint64_t seed);

// f_S(x_S) is the mean prediction over background rows with the S columns
// replaced by the query's values. Throws Error(kTooManyFeatures),
// Error(kArityMismatch), Error(kEmptyDataset) for an empty background.
ShapleyReport ShapleyMarginal(const BatchPredictor& predict, const Eigen::MatrixXd& queries,
                              const Eigen::MatrixXd& background,
                              const MarginalOptions& options = {});
ShapleyReport ShapleyMarginal(const TrainedModel& model, const Eigen::MatrixXd& queries,
                              const Eigen::MatrixXd& background,
                              const MarginalOptions& options = {});

struct RetrainOptions {
  std::size_t max_features = 13;
  FitOptions fit;
  // Called after each subset fit with (completed, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

// Subset-retraining explainer. One model is fitted per feature subset (the
// empty subset predicts the training-label mean) and cached, so repeated
// Explain calls reuse earlier fits. Safe to call concurrently.
class RetrainExplainer {
 public:
  // Throws Error(kTooManyFeatures), and Error(kInvalidArgument) when the spec
  // is randomized but carries no seed.
  RetrainExplainer(ModelSpec spec, TabularDataset train, RetrainOptions options = {});

  ShapleyReport Explain(const Eigen::MatrixXd& queries);

  std::size_t cached_models() const;
  std::size_t num_features() const { return train_.num_features(); }

 private:
  struct SubsetModel;
  void EnsureAllSubsets();
  double SubsetValue(uint64_t mask, const Eigen::RowVectorXd& query) const;

  ModelSpec spec_;
  TabularDataset train_;
  RetrainOptions options_;
  double label_mean_;
  mutable std::mutex mutex_;
  std::unordered_map<uint64_t, std::shared_ptr<const SubsetModel>> cache_;
};

ShapleyReport ShapleyRetrain(const ModelSpec& spec, const TabularDataset& train,
                             const Eigen::MatrixXd& queries, const RetrainOptions& options = {});

// ---------------------------------------------------------------------------

struct GlobalImportance {
  std::vector<std::string> feature_names;
  Eigen::VectorXd mean_abs_phi;
  std::vector<std::size_t> ranking;  // feature indices, most important first
};

// Throws Error(kEmptyDataset) for an empty report.
GlobalImportance ComputeGlobalImportance(const ShapleyReport& report);
// Header: feature,mean_abs_phi,rank (rank is 1-based, rows in rank order).
std::string WriteImportanceCsv(const GlobalImportance& importance);

struct BeeswarmRow {
  std::string feature;
  std::string system_id;
  double feature_value;
  double phi;
  double value_norm;  // per-feature min-max scaling; 0.5 for constant columns
};

// Feature-major long format. Throws Error(kRowMismatch).
std::vector<BeeswarmRow> BeeswarmExport(const ShapleyReport& report, const TabularDataset& dataset);
// Header: feature,system_id,feature_value,phi,value_norm.
std::string WriteBeeswarmCsv(std::span<const BeeswarmRow> rows);
// Header: system_id,feature,phi,feature_value,value_norm,mode,base_value.
std::string WriteAttributionCsv(const ShapleyReport& report, std::span<const BeeswarmRow> rows);
// Header: system_id,prediction.
std::string WritePredictionsCsv(const ShapleyReport& report);

// Pearson correlation of the feature columns. Constant columns correlate 0
// with everything else and 1 with themselves. Throws Error(kTooFewRows) for
// fewer than two rows.
Eigen::MatrixXd CorrelationMatrix(const TabularDataset& dataset);
// Header row and first column hold the feature names.
std::string WriteCorrelationCsv(const std::vector<std::string>& feature_names,
                                const Eigen::MatrixXd& correlation);

struct ScatterTable {
  std::vector<std::string> column_names;  // x, y, color feature names
  std::vector<std::string> system_ids;
  Eigen::MatrixXd values;                 // rows x 3
};

// Throws Error(kUnknownFeature).
ScatterTable ScatterExport(const TabularDataset& dataset, std::string_view x_feature,
                           std::string_view y_feature, std::string_view color_feature);
// Header: system_id,<x>,<y>,<color>.
std::string WriteScatterCsv(const ScatterTable& table);

}  // namespace adsorbxai

#endif  // ADSORBXAI_SHAPLEY_H_
