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

#ifndef ADSORBXAI_STRUCTIO_H_
#define ADSORBXAI_STRUCTIO_H_

#include <Eigen/Core>
#include <array>
#include <bitset>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adsorbxai/error.h"

namespace adsorbxai {

// Per-atom tag convention.
enum class AtomTag : int { kSubsurface = 0, kSurface = 1, kAdsorbate = 2 };

struct Atom {
  std::string element;  // normalized chemical symbol, e.g. "Pt"
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // Angstrom
  AtomTag tag = AtomTag::kSubsurface;
};

struct AtomicStructure {
  std::vector<Atom> atoms;
  // Row i is lattice vector i, Angstrom.
  Eigen::Matrix3d cell = Eigen::Matrix3d::Zero();
  std::array<bool, 3> pbc = {false, false, false};

  bool AnyPeriodic() const { return pbc[0] || pbc[1] || pbc[2]; }
  std::size_t CountTag(AtomTag tag) const;
  std::vector<std::size_t> IndicesWithTag(AtomTag tag) const;

  // Throws Error(kMalformedFile / kUnknownElement) if the structure breaks a
  // type invariant: known elements, finite positions, at least one adsorbate
  // and one surface atom, non-singular cell when periodic.
  void Validate() const;
};

// Metadata fields that may be absent from an input file. Absent floating
// fields hold NaN; every absent field is also recorded in `missing`.
enum class MetadataField : int {
  kPotentialEnergy = 0,
  kReferenceEnergy,
  kBandGap,
  kFormationEnergy,
  kSpaceGroup,
  kMillerIndex,
  kCount,
};

std::string_view MetadataFieldName(MetadataField field);

struct SystemMetadata {
  std::string system_id;
  double potential_energy;   // eV
  double reference_energy;   // eV
  double band_gap;           // eV
  double formation_energy;   // eV/atom
  int space_group = 0;       // 1..230
  std::array<int, 3> miller_index = {0, 0, 0};
  std::optional<double> bulk_density;  // g/cm^3 override
  std::string adsorbate_smiles;
  std::bitset<static_cast<int>(MetadataField::kCount)> missing;

  SystemMetadata();

  bool IsMissing(MetadataField field) const {
    return missing.test(static_cast<int>(field));
  }
  void MarkMissing(MetadataField field) {
    missing.set(static_cast<int>(field));
  }
  std::vector<std::string> MissingFieldNames() const;

  // Throws Error(kMalformedFile) for present-but-invalid values: negative band
  // gap, space group outside 1..230, non-finite energies.
  void Validate() const;
};

struct SystemRecord {
  AtomicStructure structure;
  SystemMetadata metadata;
};

enum class StructureFormat { kExtendedXyz, kSystemJson };

// Picks the format from the file extension (.xyz/.extxyz vs .json).
StructureFormat FormatFromPath(const std::filesystem::path& path);

std::vector<SystemRecord> ParseStructureFile(const std::filesystem::path& path,
                                             StructureFormat format,
                                             Diagnostics* diagnostics = nullptr);

// Frames without a system_id key get "<id_prefix>:<frame index>".
std::vector<SystemRecord> ParseExtendedXyz(std::string_view text,
                                           std::string_view id_prefix = "frame",
                                           Diagnostics* diagnostics = nullptr);
std::vector<SystemRecord> ParseSystemJson(std::string_view text,
                                          Diagnostics* diagnostics = nullptr);

// Missing metadata fields are omitted so that re-parsing restores the flags.
std::string WriteSystemJson(std::span<const SystemRecord> records);

enum class SubsetRule { kOxyHydroC1, kHydrogenOnMetal, kAll };

std::optional<SubsetRule> ParseSubsetRule(std::string_view name);
std::string_view SubsetRuleName(SubsetRule rule);

// OxyHydroC1 keeps adsorbates built only from H, O and C with at most one C.
// HydrogenOnMetal keeps a lone H adsorbate over an all-metal catalyst. An
// empty result is reported through `diagnostics`, not thrown.
std::vector<SystemRecord> FilterSubset(std::span<const SystemRecord> records,
                                       SubsetRule rule,
                                       Diagnostics* diagnostics = nullptr);

// potential_energy - reference_energy. Throws Error(kMissingEnergy).
double AdsorptionEnergy(const SystemMetadata& metadata);

}  // namespace adsorbxai

#endif  // ADSORBXAI_STRUCTIO_H_
