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

#ifndef ADSORBXAI_ERROR_H_
#define ADSORBXAI_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adsorbxai {

enum class ErrorCode {
  kMalformedFile,
  kUnknownElement,
  kMissingTagColumn,
  kDuplicateSystemId,
  kMissingEnergy,
  kMissingMetadata,
  kNoElectronegativity,
  kDegenerateCell,
  kMillerOutOfRange,
  kEmptyDataset,
  kTooFewRows,
  kInvalidArgument,
  kSingularKernel,
  kArityMismatch,
  kLengthMismatch,
  kTooManyFeatures,
  kRowMismatch,
  kUnknownFeature,
  kSyntaxError,
  kUnknownVariable,
  kFormatVersion,
  kOutOfRange,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type; `code()`
// identifies the failure class and `what()` carries the human-readable
// context (file position, offending field, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Collects non-fatal conditions (unknown JSON keys, empty filter results,
// solver warnings) so callers can decide how loudly to surface them.
struct Diagnostics {
  std::vector<std::string> warnings;

  void Warn(std::string message) { warnings.push_back(std::move(message)); }
};

}  // namespace adsorbxai

#endif  // ADSORBXAI_ERROR_H_
