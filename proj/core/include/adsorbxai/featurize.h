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

#ifndef ADSORBXAI_FEATURIZE_H_
#define ADSORBXAI_FEATURIZE_H_

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "adsorbxai/dataset.h"
#include "adsorbxai/structio.h"

namespace adsorbxai {

inline constexpr double kDefaultBondScale = 1.25;
inline constexpr double kAmuPerCubicAngstromInGramsPerCc = 1.66053906660;

struct FeatureVector {
  double chi_ads = 0.0;
  double n_ads_atoms = 0.0;
  double z_ads_sum = 0.0;
  double cn_ads_center = 0.0;
  double chi_cat = 0.0;
  double cn_cat_eff = 0.0;
  double chi_local = 0.0;
  double site_type = 0.0;
  double density = 0.0;
  double band_gap = 0.0;
  double space_group = 0.0;
  double miller_packed = 0.0;
  double formation_energy = 0.0;
  double label = 0.0;

  // Features in kFeatureNames order (label excluded).
  std::array<double, 13> Features() const;
};

// Pairwise minimum-image distances honouring the periodic flags. Built once
// per structure and shared by all neighbour queries.
class DistanceTable {
 public:
  explicit DistanceTable(const AtomicStructure& structure);

  double operator()(std::size_t i, std::size_t j) const { return distances_(i, j); }
  std::size_t size() const { return static_cast<std::size_t>(distances_.rows()); }

 private:
  Eigen::MatrixXd distances_;
};

// Minimum-image distance between atoms i and j.
double MinimumImageDistance(const AtomicStructure& structure, std::size_t i, std::size_t j);

// Indices j != i with d(i, j) <= scale * (r_cov(i) + r_cov(j)), ascending.
std::vector<std::size_t> NeighborShell(const AtomicStructure& structure, std::size_t atom_index,
                                       double scale);

// exp(mean(log(values))); exact when all values are equal.
double GeometricMean(std::span<const double> values);

// Geometric mean of Pauling electronegativities over the site atom and its
// first-shell catalyst (surface or subsurface) neighbours.
double LocalElectronegativity(const AtomicStructure& structure, std::size_t site_index,
                              double scale);

struct AdsorbateFeatures {
  double chi_ads;
  int n_ads_atoms;
  int z_ads_sum;
  int cn_ads_center;
  std::size_t center_index;
};

AdsorbateFeatures ComputeAdsorbateFeatures(const AtomicStructure& structure, double scale);

struct CatalystFeatures {
  double chi_cat;
  double cn_cat_eff;
  double chi_local;
  int site_type;  // 1 atop, 2 bridge, 3 hollow, 4 four-fold
  std::vector<std::size_t> interacting_atoms;
  std::size_t site_index;
  // True when no surface atom is within bonding distance of the adsorbate and
  // the nearest surface atom stood in.
  bool degenerate_geometry;
};

CatalystFeatures ComputeCatalystFeatures(const AtomicStructure& structure, double scale);

// Metadata override when present, otherwise catalyst mass over cell volume.
// Throws Error(kDegenerateCell).
double CatalystDensity(const AtomicStructure& structure, const SystemMetadata& metadata);

// 100h + 10k + l for indices in [0, 9]. Throws Error(kMillerOutOfRange).
int PackMiller(int h, int k, int l);

// Throws on missing metadata or any feature error.
FeatureVector FeaturizeRecord(const SystemRecord& record, double scale = kDefaultBondScale);

struct DroppedRecord {
  std::string system_id;
  std::string reason;
};

struct FeaturizationResult {
  TabularDataset dataset;
  std::vector<DroppedRecord> dropped;
  std::vector<std::string> degenerate_geometry_ids;
  std::string asset_version;
  std::string asset_checksum;
};

// One row per usable record, in input order regardless of `workers`.
// Throws Error(kEmptyDataset) when every record is dropped.
FeaturizationResult FeaturizeDataset(std::span<const SystemRecord> records,
                                     double scale = kDefaultBondScale, unsigned workers = 1);

// Header: system_id,reason.
std::string WriteDropReportCsv(std::span<const DroppedRecord> dropped);

}  // namespace adsorbxai

#endif  // ADSORBXAI_FEATURIZE_H_
