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

#include "adsorbxai/elements.h"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "adsorbxai/digest.h"
#include "adsorbxai/error.h"

namespace adsorbxai {
namespace {

constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

// Pauling values follow the common periodic-table compilation (Pb as Pb(IV),
// no values for He/Ne/Ar or Z > 103). Covalent radii are the Cordero et al.
// set with 2.00 A placeholders beyond Cm. Masses are IUPAC standard weights.
constexpr std::array<ElementData, 118> kElements = {{
#include "element_table.inc"
}};

}  // namespace

const std::string& ElementTableChecksum() {
  static const std::string checksum = [] {
    std::string canonical;
    char line[160];
    for (const auto& e : kElements) {
      std::snprintf(line, sizeof(line), "%d,%s,%.17g,%.17g,%.17g,%d\n",
                    e.atomic_number, std::string(e.symbol).c_str(), e.pauling,
                    e.covalent_radius, e.mass,
                    static_cast<int>(e.element_class));
      canonical += line;
    }
    return Sha256Hex(canonical);
  }();
  return checksum;
}

std::optional<std::string> NormalizeSymbol(std::string_view symbol) {
  if (symbol.empty() || symbol.size() > 2) return std::nullopt;
  std::string normalized(symbol);
  normalized[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(normalized[0])));
  for (std::size_t i = 1; i < normalized.size(); ++i) {
    normalized[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(normalized[i])));
  }
  for (const auto& e : kElements) {
    if (e.symbol == normalized) return normalized;
  }
  return std::nullopt;
}

const ElementData& LookupElement(std::string_view symbol) {
  const auto normalized = NormalizeSymbol(symbol);
  if (normalized) {
    for (const auto& e : kElements) {
      if (e.symbol == *normalized) return e;
    }
  }
  throw Error(ErrorCode::kUnknownElement,
              "'" + std::string(symbol) + "' is not a chemical symbol");
}

const ElementData& LookupElement(int atomic_number) {
  if (atomic_number < 1 || atomic_number > static_cast<int>(kElements.size())) {
    throw Error(ErrorCode::kUnknownElement,
                "atomic number " + std::to_string(atomic_number));
  }
  return kElements[atomic_number - 1];
}

bool IsKnownElement(std::string_view symbol) {
  return NormalizeSymbol(symbol).has_value();
}

double PaulingElectronegativity(std::string_view symbol) {
  const ElementData& e = LookupElement(symbol);
  if (std::isnan(e.pauling)) {
    throw Error(ErrorCode::kNoElectronegativity,
                "no Pauling value tabulated for " + std::string(e.symbol));
  }
  return e.pauling;
}

bool IsMetal(std::string_view symbol) {
  switch (LookupElement(symbol).element_class) {
    case ElementClass::kAlkali:
    case ElementClass::kAlkalineEarth:
    case ElementClass::kTransition:
    case ElementClass::kPostTransition:
    case ElementClass::kLanthanide:
    case ElementClass::kActinide:
      return true;
    default:
      return false;
  }
}

}  // namespace adsorbxai
