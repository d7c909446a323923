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

#ifndef ADSORBXAI_DIGEST_H_
#define ADSORBXAI_DIGEST_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace adsorbxai {

std::string Sha256Hex(std::string_view bytes);

// Throws Error(kIo) if the file cannot be read.
std::string Sha256File(const std::filesystem::path& path);

}  // namespace adsorbxai

#endif  // ADSORBXAI_DIGEST_H_
