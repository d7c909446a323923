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

#include "adsorbxai/dataset.h"

#include <charconv>
#include <cmath>

#include "adsorbxai/csv.h"
#include "adsorbxai/digest.h"
#include "adsorbxai/error.h"

namespace adsorbxai {

std::vector<std::string> StandardFeatureNames() {
  return {kFeatureNames.begin(), kFeatureNames.end()};
}

std::optional<std::size_t> TabularDataset::FeatureIndex(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t TabularDataset::RequireFeature(std::string_view name) const {
  if (auto index = FeatureIndex(name)) return *index;
  throw Error(ErrorCode::kUnknownFeature, "no feature named '" + std::string(name) + "'");
}

TabularDataset TabularDataset::SelectRows(std::span<const std::size_t> indices) const {
  TabularDataset out;
  out.feature_names = feature_names;
  out.rows.resize(static_cast<Eigen::Index>(indices.size()), rows.cols());
  out.labels.resize(static_cast<Eigen::Index>(indices.size()));
  out.system_ids.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(indices[r]);
    out.rows.row(static_cast<Eigen::Index>(r)) = rows.row(src);
    out.labels(static_cast<Eigen::Index>(r)) = labels(src);
    out.system_ids.push_back(system_ids.empty() ? std::string() : system_ids[indices[r]]);
  }
  return out;
}

TabularDataset TabularDataset::SelectColumns(std::span<const std::size_t> columns) const {
  TabularDataset out;
  out.rows.resize(rows.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= feature_names.size()) {
      throw Error(ErrorCode::kUnknownFeature, "column index " + std::to_string(columns[c]));
    }
    out.feature_names.push_back(feature_names[columns[c]]);
    out.rows.col(static_cast<Eigen::Index>(c)) = rows.col(static_cast<Eigen::Index>(columns[c]));
  }
  out.labels = labels;
  out.system_ids = system_ids;
  return out;
}

void TabularDataset::Validate() const {
  if (rows.cols() != static_cast<Eigen::Index>(feature_names.size())) {
    throw Error(ErrorCode::kInvalidArgument, "feature_names does not match column count");
  }
  if (labels.size() != rows.rows() || system_ids.size() != size()) {
    throw Error(ErrorCode::kInvalidArgument, "rows, labels and system_ids differ in length");
  }
  if (!rows.allFinite() || !labels.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset contains NaN or Inf");
  }
}

std::string WriteDatasetCsv(const TabularDataset& dataset) {
  std::vector<std::string> header = {"system_id"};
  header.insert(header.end(), dataset.feature_names.begin(), dataset.feature_names.end());
  header.push_back("label");
  std::string out = csv::JoinRow(header) + "\n";
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    std::vector<std::string> fields;
    fields.reserve(dataset.num_features() + 2);
    fields.push_back(dataset.system_ids[r]);
    for (Eigen::Index c = 0; c < dataset.rows.cols(); ++c) {
      fields.push_back(csv::FormatDouble(dataset.rows(row, c)));
    }
    fields.push_back(csv::FormatDouble(dataset.labels(row)));
    out += csv::JoinRow(fields) + "\n";
  }
  return out;
}

TabularDataset ParseDatasetCsv(std::string_view text) {
  const auto lines = csv::Lines(text);
  if (lines.empty()) throw Error(ErrorCode::kMalformedFile, "empty CSV");
  const auto header = csv::SplitRow(lines[0]);
  if (header.size() < 3 || header.front() != "system_id" || header.back() != "label") {
    throw Error(ErrorCode::kMalformedFile,
                "line 1: header must be system_id,<features...>,label");
  }
  TabularDataset ds;
  ds.feature_names.assign(header.begin() + 1, header.end() - 1);
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  const auto f = static_cast<Eigen::Index>(ds.feature_names.size());
  ds.rows.resize(n, f);
  ds.labels.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string where = "line " + std::to_string(r + 2);
    const auto fields = csv::SplitRow(lines[static_cast<std::size_t>(r + 1)]);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedFile, where + ": expected " +
                                                 std::to_string(header.size()) + " fields");
    }
    ds.system_ids.push_back(fields[0]);
    for (Eigen::Index c = 0; c <= f; ++c) {
      const std::string& field = fields[static_cast<std::size_t>(c + 1)];
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::kMalformedFile,
                    where + ": '" + field + "' is not a finite number");
      }
      if (c < f) {
        ds.rows(r, c) = value;
      } else {
        ds.labels(r) = value;
      }
    }
  }
  return ds;
}

std::string DatasetFingerprint(const TabularDataset& dataset) {
  return Sha256Hex(WriteDatasetCsv(dataset));
}

}  // namespace adsorbxai
