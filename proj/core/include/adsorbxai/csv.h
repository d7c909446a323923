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

#ifndef ADSORBXAI_CSV_H_
#define ADSORBXAI_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adsorbxai::csv {

// %.17g: enough digits to round-trip any double.
std::string FormatDouble(double value);

// RFC 4180 quoting, applied only when the field needs it.
std::string Escape(std::string_view field);

std::string JoinRow(const std::vector<std::string>& fields);

// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> SplitRow(std::string_view line);

// Splits text into records (one per line; quoted newlines unsupported),
// dropping a trailing empty line and any '\r'.
std::vector<std::string> Lines(std::string_view text);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace adsorbxai::csv

#endif  // ADSORBXAI_CSV_H_
