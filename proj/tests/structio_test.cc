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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "adsorbxai/csv.h"
#include "adsorbxai/elements.h"
#include "adsorbxai/error.h"
#include "adsorbxai/random.h"
#include "adsorbxai/structio.h"
#include "test_support.h"

namespace adsorbxai {
namespace {

using testing::DataPath;

constexpr const char* kThreeAtoms =
    "3\n"
    "Lattice=\"5 0 0 0 5 0 0 0 20\" Properties=species:S:1:pos:R:3:tag:I:1 pbc=\"T T F\" "
    "system_id=tiny potential_energy=-101.3 reference_energy=-100.0 band_gap=0.0 "
    "formation_energy=-0.1 space_group=225 miller_index=\"1 1 1\"\n"
    "Pt 0.0 0.0 0.0 1\n"
    "Pt 2.5 0.0 0.0 1\n"
    "H 1.25 0.0 1.5 2\n";

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

std::string AdsorbateToken(const std::string& id) {
  // Fixture ids look like "<slab>-<facet>-<adsorbate>-<n>".
  const auto last = id.rfind('-');
  const auto prev = id.rfind('-', last - 1);
  return id.substr(prev + 1, last - prev - 1);
}

TEST(StructIo, MinimalFrameParses) {
  const auto records = ParseExtendedXyz(kThreeAtoms);
  ASSERT_EQ(records.size(), 1u);
  const auto& r = records[0];
  EXPECT_EQ(r.metadata.system_id, "tiny");
  EXPECT_EQ(r.structure.CountTag(AtomTag::kAdsorbate), 1u);
  EXPECT_EQ(r.structure.CountTag(AtomTag::kSurface), 2u);
  EXPECT_TRUE(r.metadata.missing.none());
  EXPECT_EQ(r.metadata.miller_index, (std::array<int, 3>{1, 1, 1}));
  EXPECT_TRUE(r.structure.pbc[0] && r.structure.pbc[1] && !r.structure.pbc[2]);
  EXPECT_DOUBLE_EQ(r.structure.cell(2, 2), 20.0);
}

TEST(StructIo, MissingTagColumnIsRejected) {
  const std::string text =
      "2\nProperties=species:S:1:pos:R:3 system_id=a\nPt 0 0 0\nH 0 0 1.5\n";
  EXPECT_EQ(CodeOf([&] { ParseExtendedXyz(text); }), ErrorCode::kMissingTagColumn);
  const std::string json =
      R"([{"system_id":"a","atoms":[{"el":"Pt","x":0,"y":0,"z":0},)"
      R"({"el":"H","x":0,"y":0,"z":1.5,"tag":2}]}])";
  EXPECT_EQ(CodeOf([&] { ParseSystemJson(json); }), ErrorCode::kMissingTagColumn);
}

TEST(StructIo, TwoFramesGetDistinctIds) {
  std::string frame = "2\nProperties=species:S:1:pos:R:3:tag:I:1\nPt 0 0 0 1\nH 0 0 1.6 2\n";
  const auto records = ParseExtendedXyz(frame + frame, "f");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_NE(records[0].metadata.system_id, records[1].metadata.system_id);
  EXPECT_EQ(records[0].metadata.system_id, "f:0");
  EXPECT_EQ(records[1].metadata.system_id, "f:1");
  // No metadata keys: everything flagged missing and NaN.
  EXPECT_TRUE(records[0].metadata.IsMissing(MetadataField::kBandGap));
  EXPECT_TRUE(std::isnan(records[0].metadata.band_gap));
}

TEST(StructIo, DuplicateIdsRejected) {
  std::string frame =
      "2\nProperties=species:S:1:pos:R:3:tag:I:1 system_id=dup\nPt 0 0 0 1\nH 0 0 1.6 2\n";
  EXPECT_EQ(CodeOf([&] { ParseExtendedXyz(frame + frame); }), ErrorCode::kDuplicateSystemId);
}

TEST(StructIo, UnknownElementRejected) {
  std::string text = "2\nProperties=species:S:1:pos:R:3:tag:I:1\nXx 0 0 0 1\nH 0 0 1.6 2\n";
  EXPECT_EQ(CodeOf([&] { ParseExtendedXyz(text); }), ErrorCode::kUnknownElement);
}

TEST(StructIo, BadTagValueRejected) {
  std::string text = "2\nProperties=species:S:1:pos:R:3:tag:I:1\nPt 0 0 0 3\nH 0 0 1.6 2\n";
  EXPECT_EQ(CodeOf([&] { ParseExtendedXyz(text); }), ErrorCode::kMalformedFile);
}

TEST(StructIo, ErrorsCarryLineContext) {
  std::string text = "2\nProperties=species:S:1:pos:R:3:tag:I:1\nPt 0 0 0 1\nH 0 zz 1.6 2\n";
  try {
    ParseExtendedXyz(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedFile);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(StructIo, FixtureFilesLoad) {
  const auto xyz = ParseStructureFile(DataPath("fixtures.extxyz"), StructureFormat::kExtendedXyz);
  EXPECT_EQ(xyz.size(), 37u);
  const auto json = ParseStructureFile(DataPath("fixtures.json"), StructureFormat::kSystemJson);
  ASSERT_EQ(json.size(), 6u);
  for (std::size_t i = 0; i < json.size(); ++i) {
    EXPECT_EQ(json[i].metadata.system_id, xyz[i].metadata.system_id);
    ASSERT_EQ(json[i].structure.atoms.size(), xyz[i].structure.atoms.size());
    for (std::size_t a = 0; a < json[i].structure.atoms.size(); ++a) {
      EXPECT_LT((json[i].structure.atoms[a].position - xyz[i].structure.atoms[a].position)
                    .norm(),
                1e-6);
    }
  }
  EXPECT_EQ(FormatFromPath("x.extxyz"), StructureFormat::kExtendedXyz);
  EXPECT_EQ(FormatFromPath("x.json"), StructureFormat::kSystemJson);
}

TEST(StructIo, JsonRoundTripIsFieldIdentical) {
  auto records = ParseStructureFile(DataPath("fixtures.extxyz"), StructureFormat::kExtendedXyz);
  records[1].metadata.bulk_density = 21.45;
  records[2].metadata.band_gap = std::numeric_limits<double>::quiet_NaN();
  records[2].metadata.MarkMissing(MetadataField::kBandGap);
  const auto again = ParseSystemJson(WriteSystemJson(records));
  ASSERT_EQ(again.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& a = records[i];
    const auto& b = again[i];
    EXPECT_EQ(a.metadata.system_id, b.metadata.system_id);
    EXPECT_EQ(a.metadata.missing, b.metadata.missing);
    EXPECT_EQ(a.metadata.space_group, b.metadata.space_group);
    EXPECT_EQ(a.metadata.miller_index, b.metadata.miller_index);
    EXPECT_EQ(a.metadata.bulk_density, b.metadata.bulk_density);
    for (double (SystemMetadata::*f) :
         {&SystemMetadata::potential_energy, &SystemMetadata::reference_energy,
          &SystemMetadata::band_gap, &SystemMetadata::formation_energy}) {
      if (std::isnan(a.metadata.*f)) {
        EXPECT_TRUE(std::isnan(b.metadata.*f));
      } else {
        EXPECT_EQ(a.metadata.*f, b.metadata.*f);
      }
    }
    EXPECT_EQ(a.structure.pbc, b.structure.pbc);
    EXPECT_LT((a.structure.cell - b.structure.cell).cwiseAbs().maxCoeff(), 1e-10);
    ASSERT_EQ(a.structure.atoms.size(), b.structure.atoms.size());
    for (std::size_t k = 0; k < a.structure.atoms.size(); ++k) {
      EXPECT_EQ(a.structure.atoms[k].element, b.structure.atoms[k].element);
      EXPECT_EQ(a.structure.atoms[k].tag, b.structure.atoms[k].tag);
      EXPECT_LT((a.structure.atoms[k].position - b.structure.atoms[k].position).norm(), 1e-10);
    }
  }
}

TEST(StructIo, UnknownJsonKeysWarn) {
  const std::string json =
      R"([{"system_id":"a","colour":"red","atoms":[{"el":"Pt","x":0,"y":0,"z":0,"tag":1},)"
      R"({"el":"H","x":0,"y":0,"z":1.5,"tag":2}]}])";
  Diagnostics diag;
  const auto records = ParseSystemJson(json, &diag);
  ASSERT_EQ(records.size(), 1u);
  ASSERT_FALSE(diag.warnings.empty());
  EXPECT_NE(diag.warnings[0].find("colour"), std::string::npos);
}

TEST(StructIo, FilterHydrogenOnMetal) {
  SystemRecord r;
  r.metadata = testing::CompleteMetadata("h");
  r.structure.atoms = {testing::MakeAtom("Pt", 0, 0, 0, AtomTag::kSurface),
                       testing::MakeAtom("H", 0, 0, 1.6, AtomTag::kAdsorbate)};
  std::vector<SystemRecord> one{r};
  EXPECT_EQ(FilterSubset(one, SubsetRule::kHydrogenOnMetal).size(), 1u);
  one[0].structure.atoms.push_back(testing::MakeAtom("O", 3, 0, 0, AtomTag::kSubsurface));
  EXPECT_TRUE(FilterSubset(one, SubsetRule::kHydrogenOnMetal).empty());
}

TEST(StructIo, FilterC1) {
  SystemRecord r;
  r.metadata = testing::CompleteMetadata("c1");
  r.structure.atoms = {testing::MakeAtom("Pt", 0, 0, 0, AtomTag::kSurface),
                       testing::MakeAtom("C", 0, 0, 2, AtomTag::kAdsorbate),
                       testing::MakeAtom("H", 1, 0, 2.3, AtomTag::kAdsorbate),
                       testing::MakeAtom("H", -0.5, 0.8, 2.3, AtomTag::kAdsorbate),
                       testing::MakeAtom("H", -0.5, -0.8, 2.3, AtomTag::kAdsorbate)};
  SystemRecord c2 = r;
  c2.metadata.system_id = "c2";
  c2.structure.atoms = {testing::MakeAtom("Pt", 0, 0, 0, AtomTag::kSurface),
                        testing::MakeAtom("C", 0, 0, 2, AtomTag::kAdsorbate),
                        testing::MakeAtom("C", 1.3, 0, 2, AtomTag::kAdsorbate),
                        testing::MakeAtom("H", 2, 0, 2.5, AtomTag::kAdsorbate)};
  SystemRecord nh = r;
  nh.metadata.system_id = "nh";
  nh.structure.atoms[1].element = "N";
  std::vector<SystemRecord> all{r, c2, nh};
  const auto kept = FilterSubset(all, SubsetRule::kOxyHydroC1);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].metadata.system_id, "c1");
}

TEST(StructIo, FilterEmptyResultWarns) {
  SystemRecord r;
  r.metadata = testing::CompleteMetadata("x");
  r.structure.atoms = {testing::MakeAtom("Pt", 0, 0, 0, AtomTag::kSurface),
                       testing::MakeAtom("N", 0, 0, 2, AtomTag::kAdsorbate)};
  Diagnostics diag;
  std::vector<SystemRecord> one{r};
  EXPECT_TRUE(FilterSubset(one, SubsetRule::kOxyHydroC1, &diag).empty());
  EXPECT_FALSE(diag.warnings.empty());
}

TEST(StructIo, FixtureSubsetsMatchHandEnumeration) {
  const auto records =
      ParseStructureFile(DataPath("fixtures.extxyz"), StructureFormat::kExtendedXyz);
  const std::set<std::string> c1_kept = {"H", "O", "OH", "CO", "CH3"};
  std::vector<std::string> want_c1, want_h;
  for (const auto& r : records) {
    const std::string ads = AdsorbateToken(r.metadata.system_id);
    if (c1_kept.count(ads)) want_c1.push_back(r.metadata.system_id);
    // The CuO slab carries oxygen in the catalyst.
    if (ads == "H" && r.metadata.system_id.rfind("CuO", 0) != 0) {
      want_h.push_back(r.metadata.system_id);
    }
  }
  auto ids = [](const std::vector<SystemRecord>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.metadata.system_id);
    return out;
  };
  EXPECT_EQ(ids(FilterSubset(records, SubsetRule::kOxyHydroC1)), want_c1);
  EXPECT_EQ(ids(FilterSubset(records, SubsetRule::kHydrogenOnMetal)), want_h);
  EXPECT_EQ(want_c1.size(), 25u);
  EXPECT_EQ(want_h.size(), 8u);
}

TEST(StructIo, FilterAllIsIdentity) {
  const auto records =
      ParseStructureFile(DataPath("fixtures.extxyz"), StructureFormat::kExtendedXyz);
  const auto same = FilterSubset(records, SubsetRule::kAll);
  ASSERT_EQ(same.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(same[i].metadata.system_id, records[i].metadata.system_id);
  }
}

TEST(StructIo, C1OutputProperty) {
  const auto records =
      ParseStructureFile(DataPath("fixtures.extxyz"), StructureFormat::kExtendedXyz);
  for (const auto& r : FilterSubset(records, SubsetRule::kOxyHydroC1)) {
    int carbons = 0;
    for (const auto& a : r.structure.atoms) {
      if (a.tag != AtomTag::kAdsorbate) continue;
      EXPECT_TRUE(a.element == "H" || a.element == "O" || a.element == "C") << a.element;
      carbons += a.element == "C";
    }
    EXPECT_LE(carbons, 1);
  }
}

TEST(StructIo, SubsetRuleNames) {
  for (SubsetRule rule : {SubsetRule::kOxyHydroC1, SubsetRule::kHydrogenOnMetal, SubsetRule::kAll}) {
    EXPECT_EQ(ParseSubsetRule(SubsetRuleName(rule)), rule);
  }
  EXPECT_FALSE(ParseSubsetRule("nope").has_value());
}

TEST(AdsorptionEnergy, Examples) {
  SystemMetadata m = testing::CompleteMetadata("e");
  EXPECT_NEAR(AdsorptionEnergy(m), -1.3, 1e-12);
  m.reference_energy = m.potential_energy;
  EXPECT_EQ(AdsorptionEnergy(m), 0.0);
  m.potential_energy = std::numeric_limits<double>::quiet_NaN();
  m.MarkMissing(MetadataField::kPotentialEnergy);
  EXPECT_EQ(CodeOf([&] { AdsorptionEnergy(m); }), ErrorCode::kMissingEnergy);
}

TEST(AdsorptionEnergy, RandomPairs) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    SystemMetadata m = testing::CompleteMetadata("e");
    const long double p = rng.Uniform(-500, 0);
    const long double q = rng.Uniform(-500, 0);
    m.potential_energy = static_cast<double>(p);
    m.reference_energy = static_cast<double>(q);
    EXPECT_NEAR(AdsorptionEnergy(m), static_cast<double>(p - q), 1e-12);
  }
}

// Truncated or garbled input must error or yield structures that validate.
TEST(StructIo, FuzzedInputNeverYieldsInvalidStructures) {
  const std::string base = csv::ReadFile(DataPath("fixtures.extxyz")).substr(0, 6000);
  const std::string json = csv::ReadFile(DataPath("fixtures.json"));
  Rng rng(99);
  int parsed = 0;
  int rejected = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const bool use_json = trial % 2 == 1;
    std::string text = use_json ? json : base;
    switch (rng.Below(3)) {
      case 0:
        text.resize(rng.Below(text.size()));
        break;
      case 1:
        for (int k = 0; k < 5; ++k) {
          text[rng.Below(text.size())] = static_cast<char>(32 + rng.Below(95));
        }
        break;
      default: {
        const std::size_t at = rng.Below(text.size());
        text.erase(at, 1 + rng.Below(40));
      }
    }
    try {
      const auto records = use_json ? ParseSystemJson(text) : ParseExtendedXyz(text);
      for (const auto& r : records) {
        EXPECT_NO_THROW(r.structure.Validate());
        EXPECT_NO_THROW(r.metadata.Validate());
      }
      ++parsed;
    } catch (const Error&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
  EXPECT_EQ(parsed + rejected, 400);
}

TEST(Elements, PaulingValues) {
  EXPECT_DOUBLE_EQ(PaulingElectronegativity("H"), 2.20);
  EXPECT_DOUBLE_EQ(PaulingElectronegativity("O"), 3.44);
  EXPECT_DOUBLE_EQ(PaulingElectronegativity("pt"), 2.28);
  EXPECT_EQ(CodeOf([] { PaulingElectronegativity("He"); }), ErrorCode::kNoElectronegativity);
  EXPECT_EQ(CodeOf([] { LookupElement("Qq"); }), ErrorCode::kUnknownElement);
}

TEST(Elements, TableIsConsistent) {
  for (int z = 1; z <= 118; ++z) {
    const auto& e = LookupElement(z);
    EXPECT_EQ(e.atomic_number, z);
    EXPECT_EQ(&LookupElement(e.symbol), &e);
    EXPECT_GT(e.mass, 0.0);
    if (!std::isnan(e.pauling)) {
      EXPECT_GE(e.pauling, 0.7);
      EXPECT_LE(e.pauling, 4.0);
    }
  }
  EXPECT_EQ(NormalizeSymbol("PT"), "Pt");
  EXPECT_TRUE(IsMetal("Cu"));
  EXPECT_TRUE(IsMetal("Ce"));
  EXPECT_FALSE(IsMetal("O"));
  EXPECT_FALSE(IsMetal("Si"));
  EXPECT_EQ(ElementTableChecksum().size(), 64u);
}

}  // namespace
}  // namespace adsorbxai
