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

#include "adsorbxai/error.h"

namespace adsorbxai {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kUnknownElement: return "UnknownElement";
    case ErrorCode::kMissingTagColumn: return "MissingTagColumn";
    case ErrorCode::kDuplicateSystemId: return "DuplicateSystemId";
    case ErrorCode::kMissingEnergy: return "MissingEnergy";
    case ErrorCode::kMissingMetadata: return "MissingMetadata";
    case ErrorCode::kNoElectronegativity: return "NoElectronegativity";
    case ErrorCode::kDegenerateCell: return "DegenerateCell";
    case ErrorCode::kMillerOutOfRange: return "MillerOutOfRange";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSingularKernel: return "SingularKernel";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kTooManyFeatures: return "TooManyFeatures";
    case ErrorCode::kRowMismatch: return "RowMismatch";
    case ErrorCode::kUnknownFeature: return "UnknownFeature";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kUnknownVariable: return "UnknownVariable";
    case ErrorCode::kFormatVersion: return "FormatVersion";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace adsorbxai
