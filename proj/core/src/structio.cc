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

#include "adsorbxai/structio.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "adsorbxai/elements.h"
#include "json.hpp"

namespace adsorbxai {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

bool ParseDouble(std::string_view s, double& out) {
  const std::string trimmed = Trim(s);
  if (trimmed.empty()) return false;
  const char* begin = trimmed.data();
  const char* end = begin + trimmed.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool ParseInt(std::string_view s, long long& out) {
  const std::string trimmed = Trim(s);
  if (trimmed.empty()) return false;
  const char* begin = trimmed.data();
  const char* end = begin + trimmed.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

AtomTag TagFromInt(long long value, const std::string& where) {
  switch (value) {
    case 0: return AtomTag::kSubsurface;
    case 1: return AtomTag::kSurface;
    case 2: return AtomTag::kAdsorbate;
    default:
      throw Error(ErrorCode::kMalformedFile,
                  where + ": tag must be 0, 1 or 2, got " + std::to_string(value));
  }
}

std::string CanonicalElement(std::string_view raw, const std::string& where) {
  auto normalized = NormalizeSymbol(raw);
  if (!normalized) {
    throw Error(ErrorCode::kUnknownElement,
                where + ": '" + std::string(raw) + "' is not a chemical symbol");
  }
  return *normalized;
}

void CheckUniqueIds(const std::vector<SystemRecord>& records) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!seen.insert(records[i].metadata.system_id).second) {
      throw Error(ErrorCode::kDuplicateSystemId,
                  "entry " + std::to_string(i) + ": system_id '" +
                      records[i].metadata.system_id + "' repeats");
    }
  }
}

// Re-labels a validation failure with the entry/line it came from.
void ValidateRecord(const SystemRecord& record, const std::string& where) {
  try {
    record.structure.Validate();
    record.metadata.Validate();
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Extended XYZ

// Splits `key=value key="quoted value" flag` into a lower-cased key map.
std::map<std::string, std::string> ParseCommentLine(std::string_view line,
                                                    const std::string& where) {
  std::map<std::string, std::string> out;
  std::size_t i = 0;
  const std::size_t n = line.size();
  auto skip_space = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  };
  auto read_value = [&]() -> std::string {
    if (i < n && (line[i] == '"' || line[i] == '\'' || line[i] == '{')) {
      const char close = line[i] == '{' ? '}' : line[i];
      const std::size_t start = ++i;
      while (i < n && line[i] != close) ++i;
      if (i >= n) {
        throw Error(ErrorCode::kMalformedFile, where + ": unterminated quoted value");
      }
      return std::string(line.substr(start, i++ - start));
    }
    const std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    return std::string(line.substr(start, i - start));
  };
  for (skip_space(); i < n; skip_space()) {
    const std::size_t start = i;
    while (i < n && line[i] != '=' && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::string key = Lower(line.substr(start, i - start));
    skip_space();
    if (i < n && line[i] == '=') {
      ++i;
      skip_space();
      out[key] = read_value();
    } else {
      out[key] = "T";
    }
  }
  return out;
}

struct Column {
  std::string name;
  char type;
  int count;
  int offset;
};

std::vector<Column> ParseProperties(const std::string& spec, const std::string& where) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() % 3 != 0 || parts.empty()) {
    throw Error(ErrorCode::kMalformedFile, where + ": bad Properties '" + spec + "'");
  }
  std::vector<Column> columns;
  int offset = 0;
  for (std::size_t k = 0; k < parts.size(); k += 3) {
    long long count = 0;
    if (parts[k + 1].size() != 1 || !ParseInt(parts[k + 2], count) || count < 1) {
      throw Error(ErrorCode::kMalformedFile, where + ": bad Properties '" + spec + "'");
    }
    columns.push_back({Lower(parts[k]), static_cast<char>(std::toupper(parts[k + 1][0])),
                       static_cast<int>(count), offset});
    offset += static_cast<int>(count);
  }
  return columns;
}

const Column* FindColumn(const std::vector<Column>& columns, std::string_view name) {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool ParseBool(std::string_view s) {
  const std::string v = Lower(Trim(s));
  return v == "t" || v == "true" || v == "1";
}

void SetMetadataDouble(const std::map<std::string, std::string>& kv,
                       const std::string& key, MetadataField field, double& out,
                       SystemMetadata& meta, const std::string& where) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    meta.MarkMissing(field);
    return;
  }
  if (!ParseDouble(it->second, out)) {
    throw Error(ErrorCode::kMalformedFile, where + ": " + key + " is not a number");
  }
}

SystemMetadata MetadataFromComment(const std::map<std::string, std::string>& kv,
                                   const std::string& default_id,
                                   const std::string& where) {
  SystemMetadata meta;
  auto id = kv.find("system_id");
  meta.system_id = id != kv.end() ? id->second : default_id;
  SetMetadataDouble(kv, "potential_energy", MetadataField::kPotentialEnergy,
                    meta.potential_energy, meta, where);
  SetMetadataDouble(kv, "reference_energy", MetadataField::kReferenceEnergy,
                    meta.reference_energy, meta, where);
  SetMetadataDouble(kv, "band_gap", MetadataField::kBandGap, meta.band_gap, meta, where);
  SetMetadataDouble(kv, "formation_energy", MetadataField::kFormationEnergy,
                    meta.formation_energy, meta, where);
  if (auto it = kv.find("space_group"); it != kv.end()) {
    long long sg = 0;
    if (!ParseInt(it->second, sg)) {
      throw Error(ErrorCode::kMalformedFile, where + ": space_group is not an integer");
    }
    meta.space_group = static_cast<int>(sg);
  } else {
    meta.MarkMissing(MetadataField::kSpaceGroup);
  }
  if (auto it = kv.find("miller_index"); it != kv.end()) {
    std::string text = it->second;
    std::replace(text.begin(), text.end(), ',', ' ');
    const auto parts = SplitWhitespace(text);
    long long v = 0;
    if (parts.size() != 3) {
      throw Error(ErrorCode::kMalformedFile, where + ": miller_index needs 3 integers");
    }
    for (int k = 0; k < 3; ++k) {
      if (!ParseInt(parts[k], v)) {
        throw Error(ErrorCode::kMalformedFile, where + ": miller_index needs 3 integers");
      }
      meta.miller_index[k] = static_cast<int>(v);
    }
  } else {
    meta.MarkMissing(MetadataField::kMillerIndex);
  }
  if (auto it = kv.find("bulk_density"); it != kv.end()) {
    double rho = 0.0;
    if (!ParseDouble(it->second, rho)) {
      throw Error(ErrorCode::kMalformedFile, where + ": bulk_density is not a number");
    }
    meta.bulk_density = rho;
  }
  if (auto it = kv.find("adsorbate_smiles"); it != kv.end()) {
    meta.adsorbate_smiles = it->second;
  }
  return meta;
}

// ---------------------------------------------------------------------------
// SystemJson

const std::set<std::string> kEntryKeys = {"system_id", "cell", "pbc", "atoms", "metadata"};
const std::set<std::string> kAtomKeys = {"el", "x", "y", "z", "tag"};
const std::set<std::string> kMetadataKeys = {
    "potential_energy", "reference_energy", "band_gap",     "formation_energy",
    "space_group",      "miller_index",     "bulk_density", "adsorbate_smiles"};

void WarnUnknownKeys(const json& object, const std::set<std::string>& known,
                     const std::string& where, Diagnostics* diagnostics) {
  if (!diagnostics) return;
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (!known.count(it.key())) {
      diagnostics->Warn(where + ": ignoring unknown key '" + it.key() + "'");
    }
  }
}

double JsonNumber(const json& value, const std::string& what) {
  if (!value.is_number()) {
    throw Error(ErrorCode::kMalformedFile, what + " must be a number");
  }
  return value.get<double>();
}

long long JsonInteger(const json& value, const std::string& what) {
  if (value.is_number_integer()) return value.get<long long>();
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<long long>(d);
  }
  throw Error(ErrorCode::kMalformedFile, what + " must be an integer");
}

void ReadMetadataDouble(const json& meta_json, const char* key, MetadataField field,
                        double& out, SystemMetadata& meta, const std::string& where) {
  auto it = meta_json.find(key);
  if (it == meta_json.end() || it->is_null()) {
    meta.MarkMissing(field);
    return;
  }
  out = JsonNumber(*it, where + "." + key);
}

SystemRecord RecordFromJson(const json& entry, std::size_t index, Diagnostics* diagnostics) {
  const std::string where = "entry " + std::to_string(index);
  if (!entry.is_object()) {
    throw Error(ErrorCode::kMalformedFile, where + " is not an object");
  }
  WarnUnknownKeys(entry, kEntryKeys, where, diagnostics);
  SystemRecord record;
  auto id = entry.find("system_id");
  if (id == entry.end() || !id->is_string()) {
    throw Error(ErrorCode::kMalformedFile, where + ": system_id must be a string");
  }
  record.metadata.system_id = id->get<std::string>();

  if (auto cell = entry.find("cell"); cell != entry.end() && !cell->is_null()) {
    if (!cell->is_array() || cell->size() != 9) {
      throw Error(ErrorCode::kMalformedFile, where + ": cell must hold 9 numbers");
    }
    for (int k = 0; k < 9; ++k) {
      record.structure.cell(k / 3, k % 3) = JsonNumber((*cell)[k], where + ".cell");
    }
  }
  if (auto pbc = entry.find("pbc"); pbc != entry.end() && !pbc->is_null()) {
    if (!pbc->is_array() || pbc->size() != 3) {
      throw Error(ErrorCode::kMalformedFile, where + ": pbc must hold 3 booleans");
    }
    for (int k = 0; k < 3; ++k) {
      if (!(*pbc)[k].is_boolean()) {
        throw Error(ErrorCode::kMalformedFile, where + ": pbc must hold 3 booleans");
      }
      record.structure.pbc[k] = (*pbc)[k].get<bool>();
    }
  }
  auto atoms = entry.find("atoms");
  if (atoms == entry.end() || !atoms->is_array()) {
    throw Error(ErrorCode::kMalformedFile, where + ": atoms must be an array");
  }
  for (std::size_t a = 0; a < atoms->size(); ++a) {
    const json& atom_json = (*atoms)[a];
    const std::string atom_where = where + ".atoms[" + std::to_string(a) + "]";
    if (!atom_json.is_object()) {
      throw Error(ErrorCode::kMalformedFile, atom_where + " is not an object");
    }
    WarnUnknownKeys(atom_json, kAtomKeys, atom_where, diagnostics);
    auto el = atom_json.find("el");
    if (el == atom_json.end() || !el->is_string()) {
      throw Error(ErrorCode::kMalformedFile, atom_where + ": el must be a string");
    }
    auto tag = atom_json.find("tag");
    if (tag == atom_json.end() || tag->is_null()) {
      throw Error(ErrorCode::kMissingTagColumn, atom_where + " has no tag");
    }
    Atom atom;
    atom.element = CanonicalElement(el->get<std::string>(), atom_where);
    for (int k = 0; k < 3; ++k) {
      const char* axis = k == 0 ? "x" : (k == 1 ? "y" : "z");
      auto c = atom_json.find(axis);
      if (c == atom_json.end()) {
        throw Error(ErrorCode::kMalformedFile, atom_where + ": missing " + axis);
      }
      atom.position[k] = JsonNumber(*c, atom_where + "." + axis);
    }
    atom.tag = TagFromInt(JsonInteger(*tag, atom_where + ".tag"), atom_where);
    record.structure.atoms.push_back(std::move(atom));
  }

  SystemMetadata& meta = record.metadata;
  const json empty = json::object();
  auto meta_it = entry.find("metadata");
  const json& meta_json = (meta_it != entry.end() && !meta_it->is_null()) ? *meta_it : empty;
  if (!meta_json.is_object()) {
    throw Error(ErrorCode::kMalformedFile, where + ": metadata must be an object");
  }
  WarnUnknownKeys(meta_json, kMetadataKeys, where + ".metadata", diagnostics);
  ReadMetadataDouble(meta_json, "potential_energy", MetadataField::kPotentialEnergy,
                     meta.potential_energy, meta, where);
  ReadMetadataDouble(meta_json, "reference_energy", MetadataField::kReferenceEnergy,
                     meta.reference_energy, meta, where);
  ReadMetadataDouble(meta_json, "band_gap", MetadataField::kBandGap, meta.band_gap,
                     meta, where);
  ReadMetadataDouble(meta_json, "formation_energy", MetadataField::kFormationEnergy,
                     meta.formation_energy, meta, where);
  if (auto sg = meta_json.find("space_group"); sg != meta_json.end() && !sg->is_null()) {
    meta.space_group = static_cast<int>(JsonInteger(*sg, where + ".space_group"));
  } else {
    meta.MarkMissing(MetadataField::kSpaceGroup);
  }
  if (auto hkl = meta_json.find("miller_index"); hkl != meta_json.end() && !hkl->is_null()) {
    if (!hkl->is_array() || hkl->size() != 3) {
      throw Error(ErrorCode::kMalformedFile, where + ": miller_index must hold 3 integers");
    }
    for (int k = 0; k < 3; ++k) {
      meta.miller_index[k] = static_cast<int>(JsonInteger((*hkl)[k], where + ".miller_index"));
    }
  } else {
    meta.MarkMissing(MetadataField::kMillerIndex);
  }
  if (auto rho = meta_json.find("bulk_density"); rho != meta_json.end() && !rho->is_null()) {
    meta.bulk_density = JsonNumber(*rho, where + ".bulk_density");
  }
  if (auto smiles = meta_json.find("adsorbate_smiles");
      smiles != meta_json.end() && smiles->is_string()) {
    meta.adsorbate_smiles = smiles->get<std::string>();
  }
  ValidateRecord(record, where);
  return record;
}

}  // namespace

std::size_t AtomicStructure::CountTag(AtomTag tag) const {
  return static_cast<std::size_t>(std::count_if(
      atoms.begin(), atoms.end(), [tag](const Atom& a) { return a.tag == tag; }));
}

std::vector<std::size_t> AtomicStructure::IndicesWithTag(AtomTag tag) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].tag == tag) out.push_back(i);
  }
  return out;
}

void AtomicStructure::Validate() const {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!IsKnownElement(atoms[i].element)) {
      throw Error(ErrorCode::kUnknownElement, "atom " + std::to_string(i) + ": '" +
                                                  atoms[i].element + "'");
    }
    if (!atoms[i].position.allFinite()) {
      throw Error(ErrorCode::kMalformedFile,
                  "atom " + std::to_string(i) + " has a non-finite position");
    }
  }
  if (CountTag(AtomTag::kAdsorbate) == 0) {
    throw Error(ErrorCode::kMalformedFile, "no adsorbate-tagged atom");
  }
  if (CountTag(AtomTag::kSurface) == 0) {
    throw Error(ErrorCode::kMalformedFile, "no surface-tagged atom");
  }
  if (!cell.allFinite()) {
    throw Error(ErrorCode::kMalformedFile, "cell has non-finite entries");
  }
  if (AnyPeriodic() && std::abs(cell.determinant()) < 1e-12) {
    throw Error(ErrorCode::kMalformedFile, "periodic structure with singular cell");
  }
}

std::string_view MetadataFieldName(MetadataField field) {
  switch (field) {
    case MetadataField::kPotentialEnergy: return "potential_energy";
    case MetadataField::kReferenceEnergy: return "reference_energy";
    case MetadataField::kBandGap: return "band_gap";
    case MetadataField::kFormationEnergy: return "formation_energy";
    case MetadataField::kSpaceGroup: return "space_group";
    case MetadataField::kMillerIndex: return "miller_index";
    case MetadataField::kCount: break;
  }
  return "unknown";
}

SystemMetadata::SystemMetadata()
    : potential_energy(kNaN),
      reference_energy(kNaN),
      band_gap(kNaN),
      formation_energy(kNaN) {}

std::vector<std::string> SystemMetadata::MissingFieldNames() const {
  std::vector<std::string> names;
  for (int f = 0; f < static_cast<int>(MetadataField::kCount); ++f) {
    if (missing.test(f)) {
      names.emplace_back(MetadataFieldName(static_cast<MetadataField>(f)));
    }
  }
  return names;
}

void SystemMetadata::Validate() const {
  auto check_finite = [&](double v, MetadataField f) {
    if (!IsMissing(f) && !std::isfinite(v)) {
      throw Error(ErrorCode::kMalformedFile,
                  std::string(MetadataFieldName(f)) + " is not finite");
    }
  };
  check_finite(potential_energy, MetadataField::kPotentialEnergy);
  check_finite(reference_energy, MetadataField::kReferenceEnergy);
  check_finite(band_gap, MetadataField::kBandGap);
  check_finite(formation_energy, MetadataField::kFormationEnergy);
  if (!IsMissing(MetadataField::kBandGap) && band_gap < 0.0) {
    throw Error(ErrorCode::kMalformedFile, "band_gap is negative");
  }
  if (!IsMissing(MetadataField::kSpaceGroup) && (space_group < 1 || space_group > 230)) {
    throw Error(ErrorCode::kMalformedFile,
                "space_group " + std::to_string(space_group) + " outside 1..230");
  }
  if (bulk_density && !(std::isfinite(*bulk_density) && *bulk_density > 0.0)) {
    throw Error(ErrorCode::kMalformedFile, "bulk_density must be positive");
  }
}

StructureFormat FormatFromPath(const std::filesystem::path& path) {
  const std::string ext = Lower(path.extension().string());
  if (ext == ".json") return StructureFormat::kSystemJson;
  if (ext == ".xyz" || ext == ".extxyz") return StructureFormat::kExtendedXyz;
  throw Error(ErrorCode::kInvalidArgument,
              "cannot infer structure format from '" + path.string() + "'");
}

std::vector<SystemRecord> ParseStructureFile(const std::filesystem::path& path,
                                             StructureFormat format,
                                             Diagnostics* diagnostics) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (format == StructureFormat::kSystemJson) return ParseSystemJson(text, diagnostics);
  return ParseExtendedXyz(text, path.stem().string(), diagnostics);
}

std::vector<SystemRecord> ParseExtendedXyz(std::string_view text, std::string_view id_prefix,
                                           Diagnostics* diagnostics) {
  std::vector<std::string> lines;
  {
    std::string current;
    for (char c : text) {
      if (c == '\n') {
        if (!current.empty() && current.back() == '\r') current.pop_back();
        lines.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) lines.push_back(std::move(current));
  }

  std::vector<SystemRecord> records;
  std::size_t line_no = 0;
  while (line_no < lines.size()) {
    if (Trim(lines[line_no]).empty()) {
      ++line_no;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no + 1);
    long long natoms = 0;
    if (!ParseInt(lines[line_no], natoms) || natoms < 1) {
      throw Error(ErrorCode::kMalformedFile, where + ": expected a positive atom count");
    }
    if (line_no + 1 + static_cast<std::size_t>(natoms) >= lines.size()) {
      throw Error(ErrorCode::kMalformedFile, where + ": frame truncated, expected " +
                                                 std::to_string(natoms) + " atoms");
    }
    const std::string comment_where = "line " + std::to_string(line_no + 2);
    const auto kv = ParseCommentLine(lines[line_no + 1], comment_where);
    if (diagnostics) {
      static const std::set<std::string> known = {
          "lattice", "properties", "pbc", "system_id", "potential_energy",
          "reference_energy", "band_gap", "formation_energy", "space_group",
          "miller_index", "bulk_density", "adsorbate_smiles"};
      for (const auto& [key, value] : kv) {
        if (!known.count(key)) {
          diagnostics->Warn(comment_where + ": ignoring unknown key '" + key + "'");
        }
      }
    }

    SystemRecord record;
    record.metadata = MetadataFromComment(
        kv, std::string(id_prefix) + ":" + std::to_string(records.size()), comment_where);
    if (auto lattice = kv.find("lattice"); lattice != kv.end()) {
      const auto parts = SplitWhitespace(lattice->second);
      if (parts.size() != 9) {
        throw Error(ErrorCode::kMalformedFile, comment_where + ": Lattice needs 9 numbers");
      }
      for (int k = 0; k < 9; ++k) {
        if (!ParseDouble(parts[k], record.structure.cell(k / 3, k % 3))) {
          throw Error(ErrorCode::kMalformedFile, comment_where + ": bad Lattice entry");
        }
      }
      record.structure.pbc = {true, true, true};
    }
    if (auto pbc = kv.find("pbc"); pbc != kv.end()) {
      const auto parts = SplitWhitespace(pbc->second);
      if (parts.size() != 3) {
        throw Error(ErrorCode::kMalformedFile, comment_where + ": pbc needs 3 flags");
      }
      for (int k = 0; k < 3; ++k) record.structure.pbc[k] = ParseBool(parts[k]);
    }
    const auto prop = kv.find("properties");
    const auto columns = ParseProperties(
        prop != kv.end() ? prop->second : std::string("species:S:1:pos:R:3"), comment_where);
    const Column* species = FindColumn(columns, "species");
    const Column* pos = FindColumn(columns, "pos");
    const Column* tag = FindColumn(columns, "tag");
    if (tag == nullptr) tag = FindColumn(columns, "tags");
    if (species == nullptr || pos == nullptr || pos->count != 3) {
      throw Error(ErrorCode::kMalformedFile,
                  comment_where + ": Properties must declare species:S:1 and pos:R:3");
    }
    if (tag == nullptr) {
      throw Error(ErrorCode::kMissingTagColumn,
                  comment_where + ": Properties has no integer 'tag' column");
    }
    if (tag->type != 'I' || tag->count != 1) {
      throw Error(ErrorCode::kMalformedFile, comment_where + ": tag column must be I:1");
    }
    const int width = columns.back().offset + columns.back().count;

    for (long long a = 0; a < natoms; ++a) {
      const std::size_t atom_line = line_no + 2 + static_cast<std::size_t>(a);
      const std::string atom_where = "line " + std::to_string(atom_line + 1);
      const auto fields = SplitWhitespace(lines[atom_line]);
      if (static_cast<int>(fields.size()) != width) {
        throw Error(ErrorCode::kMalformedFile,
                    atom_where + ": expected " + std::to_string(width) + " columns, got " +
                        std::to_string(fields.size()));
      }
      Atom atom;
      atom.element = CanonicalElement(fields[species->offset], atom_where);
      for (int k = 0; k < 3; ++k) {
        if (!ParseDouble(fields[pos->offset + k], atom.position[k])) {
          throw Error(ErrorCode::kMalformedFile, atom_where + ": bad coordinate");
        }
      }
      long long tag_value = 0;
      if (!ParseInt(fields[tag->offset], tag_value)) {
        throw Error(ErrorCode::kMalformedFile, atom_where + ": tag is not an integer");
      }
      atom.tag = TagFromInt(tag_value, atom_where);
      record.structure.atoms.push_back(std::move(atom));
    }
    ValidateRecord(record, "frame at " + where);
    records.push_back(std::move(record));
    line_no += 2 + static_cast<std::size_t>(natoms);
  }
  if (records.empty()) throw Error(ErrorCode::kMalformedFile, "no frames found");
  CheckUniqueIds(records);
  return records;
}

std::vector<SystemRecord> ParseSystemJson(std::string_view text, Diagnostics* diagnostics) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedFile,
                "byte " + std::to_string(e.byte) + ": " + std::string(e.what()));
  }
  if (!root.is_array()) {
    throw Error(ErrorCode::kMalformedFile, "top level must be an array of systems");
  }
  std::vector<SystemRecord> records;
  records.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    records.push_back(RecordFromJson(root[i], i, diagnostics));
  }
  CheckUniqueIds(records);
  return records;
}

std::string WriteSystemJson(std::span<const SystemRecord> records) {
  json root = json::array();
  for (const auto& record : records) {
    const auto& s = record.structure;
    const auto& m = record.metadata;
    json entry;
    entry["system_id"] = m.system_id;
    json cell = json::array();
    for (int k = 0; k < 9; ++k) cell.push_back(s.cell(k / 3, k % 3));
    entry["cell"] = cell;
    entry["pbc"] = {s.pbc[0], s.pbc[1], s.pbc[2]};
    json atoms = json::array();
    for (const auto& a : s.atoms) {
      atoms.push_back({{"el", a.element},
                       {"x", a.position.x()},
                       {"y", a.position.y()},
                       {"z", a.position.z()},
                       {"tag", static_cast<int>(a.tag)}});
    }
    entry["atoms"] = atoms;
    json meta = json::object();
    if (!m.IsMissing(MetadataField::kPotentialEnergy)) meta["potential_energy"] = m.potential_energy;
    if (!m.IsMissing(MetadataField::kReferenceEnergy)) meta["reference_energy"] = m.reference_energy;
    if (!m.IsMissing(MetadataField::kBandGap)) meta["band_gap"] = m.band_gap;
    if (!m.IsMissing(MetadataField::kFormationEnergy)) meta["formation_energy"] = m.formation_energy;
    if (!m.IsMissing(MetadataField::kSpaceGroup)) meta["space_group"] = m.space_group;
    if (!m.IsMissing(MetadataField::kMillerIndex)) {
      meta["miller_index"] = {m.miller_index[0], m.miller_index[1], m.miller_index[2]};
    }
    if (m.bulk_density) meta["bulk_density"] = *m.bulk_density;
    if (!m.adsorbate_smiles.empty()) meta["adsorbate_smiles"] = m.adsorbate_smiles;
    entry["metadata"] = meta;
    root.push_back(std::move(entry));
  }
  return root.dump(2) + "\n";
}

std::optional<SubsetRule> ParseSubsetRule(std::string_view name) {
  const std::string n = Lower(name);
  if (n == "all") return SubsetRule::kAll;
  if (n == "ohc1") return SubsetRule::kOxyHydroC1;
  if (n == "h-metal") return SubsetRule::kHydrogenOnMetal;
  return std::nullopt;
}

std::string_view SubsetRuleName(SubsetRule rule) {
  switch (rule) {
    case SubsetRule::kAll: return "all";
    case SubsetRule::kOxyHydroC1: return "ohc1";
    case SubsetRule::kHydrogenOnMetal: return "h-metal";
  }
  return "unknown";
}

std::vector<SystemRecord> FilterSubset(std::span<const SystemRecord> records,
                                       SubsetRule rule, Diagnostics* diagnostics) {
  if (records.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "FilterSubset needs at least one record");
  }
  auto keep = [rule](const SystemRecord& r) {
    const auto& atoms = r.structure.atoms;
    switch (rule) {
      case SubsetRule::kAll:
        return true;
      case SubsetRule::kOxyHydroC1: {
        int carbons = 0;
        for (const auto& a : atoms) {
          if (a.tag != AtomTag::kAdsorbate) continue;
          if (a.element == "C") {
            ++carbons;
          } else if (a.element != "H" && a.element != "O") {
            return false;
          }
        }
        return carbons <= 1;
      }
      case SubsetRule::kHydrogenOnMetal: {
        int adsorbate_atoms = 0;
        bool lone_h = false;
        for (const auto& a : atoms) {
          if (a.tag == AtomTag::kAdsorbate) {
            ++adsorbate_atoms;
            lone_h = a.element == "H";
          } else if (!IsMetal(a.element)) {
            return false;
          }
        }
        return adsorbate_atoms == 1 && lone_h;
      }
    }
    return false;
  };
  std::vector<SystemRecord> kept;
  for (const auto& r : records) {
    if (keep(r)) kept.push_back(r);
  }
  if (kept.empty() && diagnostics) {
    diagnostics->Warn("EmptyResult: no record passes filter '" +
                      std::string(SubsetRuleName(rule)) + "'");
  }
  return kept;
}

double AdsorptionEnergy(const SystemMetadata& metadata) {
  if (metadata.IsMissing(MetadataField::kPotentialEnergy) ||
      metadata.IsMissing(MetadataField::kReferenceEnergy) ||
      !std::isfinite(metadata.potential_energy) ||
      !std::isfinite(metadata.reference_energy)) {
    throw Error(ErrorCode::kMissingEnergy,
                "system '" + metadata.system_id + "' lacks potential or reference energy");
  }
  return metadata.potential_energy - metadata.reference_energy;
}

}  // namespace adsorbxai
