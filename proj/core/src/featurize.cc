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

#include "adsorbxai/featurize.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "adsorbxai/csv.h"
#include "adsorbxai/elements.h"
#include "adsorbxai/error.h"
#include "adsorbxai/parallel.h"

namespace adsorbxai {
namespace {

// Distances closer than this are treated as ties when picking the site atom.
constexpr double kDistanceTieTolerance = 1e-6;

bool IsCatalyst(const Atom& atom) { return atom.tag != AtomTag::kAdsorbate; }

class MinimumImage {
 public:
  explicit MinimumImage(const AtomicStructure& s) : pbc_(s.pbc), cell_(s.cell) {
    if (!s.AnyPeriodic()) return;
    const double volume = std::abs(cell_.determinant());
    if (volume < 1e-12) {
      throw Error(ErrorCode::kDegenerateCell, "periodic structure with singular cell");
    }
    inverse_ = cell_.inverse();
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d a = cell_.row((k + 1) % 3);
      const Eigen::Vector3d b = cell_.row((k + 2) % 3);
      spacing_[k] = volume / a.cross(b).norm();
    }
  }

  double Distance(const Eigen::Vector3d& delta) const {
    if (!(pbc_[0] || pbc_[1] || pbc_[2])) return delta.norm();
    Eigen::RowVector3d frac = delta.transpose() * inverse_;
    for (int k = 0; k < 3; ++k) {
      if (pbc_[k]) frac[k] -= std::round(frac[k]);
    }
    const double d0 = (frac * cell_).norm();
    // Any shorter image differs by at most d0 / spacing + 1/2 cells per axis.
    std::array<int, 3> range{};
    for (int k = 0; k < 3; ++k) {
      range[k] = pbc_[k] ? static_cast<int>(std::ceil(d0 / spacing_[k] + 0.5)) : 0;
    }
    double best = d0;
    for (int i = -range[0]; i <= range[0]; ++i) {
      for (int j = -range[1]; j <= range[1]; ++j) {
        for (int k = -range[2]; k <= range[2]; ++k) {
          if (i == 0 && j == 0 && k == 0) continue;
          const Eigen::RowVector3d shifted = frac + Eigen::RowVector3d(i, j, k);
          best = std::min(best, (shifted * cell_).norm());
        }
      }
    }
    return best;
  }

 private:
  std::array<bool, 3> pbc_;
  Eigen::Matrix3d cell_;
  Eigen::Matrix3d inverse_ = Eigen::Matrix3d::Identity();
  std::array<double, 3> spacing_{};
};

std::vector<double> CovalentRadii(const AtomicStructure& s) {
  std::vector<double> radii;
  radii.reserve(s.atoms.size());
  for (const auto& a : s.atoms) radii.push_back(LookupElement(a.element).covalent_radius);
  return radii;
}

// Shared per-structure state for neighbour queries.
struct Geometry {
  const AtomicStructure& structure;
  DistanceTable distances;
  std::vector<double> radii;
  double scale;

  Geometry(const AtomicStructure& s, double bond_scale)
      : structure(s), distances(s), radii(CovalentRadii(s)), scale(bond_scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw Error(ErrorCode::kInvalidArgument, "bond scale must be positive");
    }
  }

  bool Bonded(std::size_t i, std::size_t j) const {
    return i != j && distances(i, j) <= scale * (radii[i] + radii[j]);
  }

  template <typename Pred>
  std::vector<std::size_t> Neighbors(std::size_t i, Pred include) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < structure.atoms.size(); ++j) {
      if (Bonded(i, j) && include(structure.atoms[j])) out.push_back(j);
    }
    return out;
  }

  double DistanceToAdsorbate(std::size_t j) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < structure.atoms.size(); ++a) {
      if (structure.atoms[a].tag == AtomTag::kAdsorbate) best = std::min(best, distances(a, j));
    }
    return best;
  }

  double LocalElectronegativity(std::size_t site) const {
    std::vector<double> chis = {PaulingElectronegativity(structure.atoms[site].element)};
    for (std::size_t j : Neighbors(site, IsCatalyst)) {
      chis.push_back(PaulingElectronegativity(structure.atoms[j].element));
    }
    return GeometricMean(chis);
  }
};

void CheckIndex(const AtomicStructure& s, std::size_t index) {
  if (index >= s.atoms.size()) {
    throw Error(ErrorCode::kInvalidArgument, "atom index " + std::to_string(index) +
                                                 " out of range for " +
                                                 std::to_string(s.atoms.size()) + " atoms");
  }
}

AdsorbateFeatures AdsorbateFeaturesFrom(const Geometry& g) {
  const auto& atoms = g.structure.atoms;
  const auto ads = g.structure.IndicesWithTag(AtomTag::kAdsorbate);
  if (ads.empty()) throw Error(ErrorCode::kInvalidArgument, "no adsorbate atoms");
  AdsorbateFeatures f{};
  double chi_sum = 0.0;
  struct Candidate {
    int count;
    std::string_view symbol;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i : ads) {
    const auto& e = LookupElement(atoms[i].element);
    chi_sum += PaulingElectronegativity(atoms[i].element);
    f.z_ads_sum += e.atomic_number;
    const auto shell =
        g.Neighbors(i, [](const Atom& a) { return a.tag == AtomTag::kAdsorbate; });
    candidates.push_back({static_cast<int>(shell.size()), e.symbol, i});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    return a.index < b.index;
  });
  f.n_ads_atoms = static_cast<int>(ads.size());
  f.chi_ads = chi_sum / static_cast<double>(ads.size());
  f.cn_ads_center = candidates.front().count;
  f.center_index = candidates.front().index;
  return f;
}

CatalystFeatures CatalystFeaturesFrom(const Geometry& g) {
  const auto& atoms = g.structure.atoms;
  const auto surface = g.structure.IndicesWithTag(AtomTag::kSurface);
  const auto ads = g.structure.IndicesWithTag(AtomTag::kAdsorbate);
  if (surface.empty()) throw Error(ErrorCode::kInvalidArgument, "no surface atoms");
  if (ads.empty()) throw Error(ErrorCode::kInvalidArgument, "no adsorbate atoms");

  CatalystFeatures f{};
  for (std::size_t j : surface) {
    for (std::size_t a : ads) {
      if (g.Bonded(a, j)) {
        f.interacting_atoms.push_back(j);
        break;
      }
    }
  }
  f.degenerate_geometry = f.interacting_atoms.empty();

  // Nearest-to-adsorbate selection with a value-based tie-break so the result
  // does not depend on atom order.
  auto pick_nearest = [&](const std::vector<std::size_t>& pool) {
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t j : pool) best_distance = std::min(best_distance, g.DistanceToAdsorbate(j));
    std::optional<std::size_t> best;
    double best_local = 0.0;
    for (std::size_t j : pool) {
      if (g.DistanceToAdsorbate(j) > best_distance + kDistanceTieTolerance) continue;
      const double local = g.LocalElectronegativity(j);
      if (!best || atoms[j].element < atoms[*best].element ||
          (atoms[j].element == atoms[*best].element && local < best_local)) {
        best = j;
        best_local = local;
      }
    }
    return *best;
  };

  if (f.degenerate_geometry) f.interacting_atoms = {pick_nearest(surface)};

  double chi_sum = 0.0;
  double cn_sum = 0.0;
  for (std::size_t j : f.interacting_atoms) {
    chi_sum += PaulingElectronegativity(atoms[j].element);
    cn_sum += static_cast<double>(g.Neighbors(j, IsCatalyst).size());
  }
  const auto count = static_cast<double>(f.interacting_atoms.size());
  f.chi_cat = chi_sum / count;
  f.cn_cat_eff = cn_sum / count;
  f.site_index = pick_nearest(f.interacting_atoms);
  f.chi_local = g.LocalElectronegativity(f.site_index);
  f.site_type = std::min<int>(4, static_cast<int>(f.interacting_atoms.size()));
  return f;
}

std::string MissingReason(const SystemMetadata& meta) {
  std::string reason;
  for (const auto& name : meta.MissingFieldNames()) {
    reason += reason.empty() ? "missing " : ";";
    reason += name;
  }
  return reason;
}

}  // namespace

std::array<double, 13> FeatureVector::Features() const {
  return {chi_ads,    n_ads_atoms, z_ads_sum, cn_ads_center, chi_cat,     cn_cat_eff,   chi_local,
          site_type,  density,     band_gap,  space_group,   miller_packed, formation_energy};
}

DistanceTable::DistanceTable(const AtomicStructure& structure) {
  const auto n = static_cast<Eigen::Index>(structure.atoms.size());
  distances_ = Eigen::MatrixXd::Zero(n, n);
  const MinimumImage image(structure);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::Vector3d delta = structure.atoms[static_cast<std::size_t>(j)].position -
                                    structure.atoms[static_cast<std::size_t>(i)].position;
      distances_(i, j) = distances_(j, i) = image.Distance(delta);
    }
  }
}

double MinimumImageDistance(const AtomicStructure& structure, std::size_t i, std::size_t j) {
  CheckIndex(structure, i);
  CheckIndex(structure, j);
  if (i == j) return 0.0;
  return MinimumImage(structure).Distance(structure.atoms[j].position -
                                          structure.atoms[i].position);
}

std::vector<std::size_t> NeighborShell(const AtomicStructure& structure, std::size_t atom_index,
                                       double scale) {
  CheckIndex(structure, atom_index);
  const Geometry g(structure, scale);
  return g.Neighbors(atom_index, [](const Atom&) { return true; });
}

double GeometricMean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "geometric mean of nothing");
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    return values[0];
  }
  double log_sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw Error(ErrorCode::kInvalidArgument, "geometric mean needs v > 0");
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

double LocalElectronegativity(const AtomicStructure& structure, std::size_t site_index,
                              double scale) {
  CheckIndex(structure, site_index);
  return Geometry(structure, scale).LocalElectronegativity(site_index);
}

AdsorbateFeatures ComputeAdsorbateFeatures(const AtomicStructure& structure, double scale) {
  return AdsorbateFeaturesFrom(Geometry(structure, scale));
}

CatalystFeatures ComputeCatalystFeatures(const AtomicStructure& structure, double scale) {
  return CatalystFeaturesFrom(Geometry(structure, scale));
}

double CatalystDensity(const AtomicStructure& structure, const SystemMetadata& metadata) {
  if (metadata.bulk_density) return *metadata.bulk_density;
  const double volume = std::abs(structure.cell.determinant());
  if (!(volume > 1e-9)) {
    throw Error(ErrorCode::kDegenerateCell,
                "cell volume is zero and no bulk_density override is given");
  }
  double mass = 0.0;
  for (const auto& a : structure.atoms) {
    if (IsCatalyst(a)) mass += LookupElement(a.element).mass;
  }
  return mass / volume * kAmuPerCubicAngstromInGramsPerCc;
}

int PackMiller(int h, int k, int l) {
  for (int v : {h, k, l}) {
    if (v < 0 || v > 9) {
      throw Error(ErrorCode::kMillerOutOfRange,
                  "(" + std::to_string(h) + "," + std::to_string(k) + "," + std::to_string(l) +
                      ") has an index outside 0..9");
    }
  }
  return 100 * h + 10 * k + l;
}

namespace {

FeatureVector FeaturizeRecordImpl(const SystemRecord& record, double scale,
                                  bool* degenerate_geometry) {
  const auto& meta = record.metadata;
  if (meta.missing.any()) {
    throw Error(ErrorCode::kMissingMetadata, MissingReason(meta));
  }
  const Geometry g(record.structure, scale);
  const AdsorbateFeatures ads = AdsorbateFeaturesFrom(g);
  const CatalystFeatures cat = CatalystFeaturesFrom(g);
  FeatureVector f;
  f.chi_ads = ads.chi_ads;
  f.n_ads_atoms = ads.n_ads_atoms;
  f.z_ads_sum = ads.z_ads_sum;
  f.cn_ads_center = ads.cn_ads_center;
  f.chi_cat = cat.chi_cat;
  f.cn_cat_eff = cat.cn_cat_eff;
  f.chi_local = cat.chi_local;
  f.site_type = cat.site_type;
  f.density = CatalystDensity(record.structure, meta);
  f.band_gap = meta.band_gap;
  f.space_group = meta.space_group;
  f.miller_packed = PackMiller(meta.miller_index[0], meta.miller_index[1], meta.miller_index[2]);
  f.formation_energy = meta.formation_energy;
  f.label = AdsorptionEnergy(meta);
  if (degenerate_geometry) *degenerate_geometry = cat.degenerate_geometry;
  return f;
}

}  // namespace

FeatureVector FeaturizeRecord(const SystemRecord& record, double scale) {
  return FeaturizeRecordImpl(record, scale, nullptr);
}

FeaturizationResult FeaturizeDataset(std::span<const SystemRecord> records, double scale,
                                     unsigned workers) {
  struct Outcome {
    std::optional<FeatureVector> features;
    bool degenerate = false;
    std::string reason;
  };
  std::vector<Outcome> outcomes(records.size());
  ParallelFor(records.size(), workers, [&](std::size_t i) {
    const auto& record = records[i];
    Outcome& out = outcomes[i];
    if (record.metadata.missing.any()) {
      out.reason = MissingReason(record.metadata);
      return;
    }
    try {
      out.features = FeaturizeRecordImpl(record, scale, &out.degenerate);
    } catch (const Error& e) {
      out.reason = e.what();
    }
  });

  FeaturizationResult result;
  result.asset_version = std::string(kElementTableVersion);
  result.asset_checksum = ElementTableChecksum();
  std::vector<std::array<double, 13>> rows;
  std::vector<double> labels;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& id = records[i].metadata.system_id;
    if (!outcomes[i].features) {
      result.dropped.push_back({id, outcomes[i].reason});
      continue;
    }
    const FeatureVector& f = *outcomes[i].features;
    const auto values = f.Features();
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }) ||
        !std::isfinite(f.label)) {
      result.dropped.push_back({id, "non-finite feature value"});
      continue;
    }
    rows.push_back(values);
    labels.push_back(f.label);
    result.dataset.system_ids.push_back(id);
    if (outcomes[i].degenerate) result.degenerate_geometry_ids.push_back(id);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyDataset,
                "all " + std::to_string(records.size()) + " records were dropped");
  }
  auto& ds = result.dataset;
  ds.feature_names = StandardFeatureNames();
  ds.rows.resize(static_cast<Eigen::Index>(rows.size()), 13);
  ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < 13; ++c) ds.rows(static_cast<Eigen::Index>(r), c) = rows[r][c];
    ds.labels(static_cast<Eigen::Index>(r)) = labels[r];
  }
  return result;
}

std::string WriteDropReportCsv(std::span<const DroppedRecord> dropped) {
  std::string out = "system_id,reason\n";
  for (const auto& d : dropped) out += csv::JoinRow({d.system_id, d.reason}) + "\n";
  return out;
}

}  // namespace adsorbxai
