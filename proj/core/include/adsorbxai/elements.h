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

#ifndef ADSORBXAI_ELEMENTS_H_
#define ADSORBXAI_ELEMENTS_H_

#include <optional>
#include <string>
#include <string_view>

namespace adsorbxai {

enum class ElementClass {
  kAlkali,
  kAlkalineEarth,
  kTransition,
  kPostTransition,
  kLanthanide,
  kActinide,
  kMetalloid,
  kNonmetal,
  kNobleGas,
};

struct ElementData {
  int atomic_number;
  std::string_view symbol;
  // Pauling electronegativity; NaN when the element has no tabulated value.
  double pauling;
  // Single-bond covalent radius in Angstrom.
  double covalent_radius;
  // Standard atomic weight in amu.
  double mass;
  ElementClass element_class;
};

// Version tag of the bundled element property asset. Bump whenever any value
// in the table changes.
inline constexpr std::string_view kElementTableVersion = "elements-2026.1";

// Hex SHA-256 over a canonical text rendering of the element table.
const std::string& ElementTableChecksum();

// "pt", "PT" and "Pt" all normalize to "Pt". Returns nullopt for strings that
// are not one of the 118 known symbols.
std::optional<std::string> NormalizeSymbol(std::string_view symbol);

// Lookup by (case-insensitive) symbol. Throws Error(kUnknownElement).
const ElementData& LookupElement(std::string_view symbol);
const ElementData& LookupElement(int atomic_number);
bool IsKnownElement(std::string_view symbol);

// Pauling electronegativity. Throws Error(kNoElectronegativity) for elements
// without a tabulated value (He, Ne, Ar, superheavies).
double PaulingElectronegativity(std::string_view symbol);

// Alkali, alkaline-earth, transition, post-transition, lanthanide and actinide
// elements count as metallic.
bool IsMetal(std::string_view symbol);

}  // namespace adsorbxai

#endif  // ADSORBXAI_ELEMENTS_H_
