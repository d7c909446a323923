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

#ifndef ADSORBXAI_DATASET_H_
#define ADSORBXAI_DATASET_H_

#include <Eigen/Core>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adsorbxai {

// Column order of every feature table, report and CSV.
inline constexpr std::array<std::string_view, 13> kFeatureNames = {
    "chi_ads",   "n_ads_atoms", "z_ads_sum", "cn_ads_center",  "chi_cat",
    "cn_cat_eff", "chi_local",  "site_type", "density",        "band_gap",
    "space_group", "miller_packed", "formation_energy"};

std::vector<std::string> StandardFeatureNames();

// n rows x F features plus one label per row.
struct TabularDataset {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd rows;
  Eigen::VectorXd labels;
  std::vector<std::string> system_ids;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t num_features() const { return feature_names.size(); }
  bool empty() const { return size() == 0; }

  std::optional<std::size_t> FeatureIndex(std::string_view name) const;
  // Throws Error(kUnknownFeature).
  std::size_t RequireFeature(std::string_view name) const;

  TabularDataset SelectRows(std::span<const std::size_t> indices) const;
  TabularDataset SelectColumns(std::span<const std::size_t> columns) const;

  // Shape consistency, no NaN/Inf. Throws Error(kInvalidArgument).
  void Validate() const;
};

// Header: system_id,<feature names...>,label. Values use %.17g.
std::string WriteDatasetCsv(const TabularDataset& dataset);

// Inverse of WriteDatasetCsv. Throws Error(kMalformedFile) with the offending
// line number.
TabularDataset ParseDatasetCsv(std::string_view text);

// Order-independent-of-storage fingerprint (hex SHA-256 of the CSV rendering).
std::string DatasetFingerprint(const TabularDataset& dataset);

}  // namespace adsorbxai

#endif  // ADSORBXAI_DATASET_H_
