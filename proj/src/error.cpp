// Copyright 2026 The cood Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cood/error.hpp"

namespace cood {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kBatchTooSmall: return "BatchTooSmall";
    case ErrorCode::kZeroEmbedding: return "ZeroEmbedding";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kIncompatibleInput: return "IncompatibleInput";
    case ErrorCode::kWindowOutOfBounds: return "WindowOutOfBounds";
    case ErrorCode::kEmptySide: return "EmptySide";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kMisalignedRuns: return "MisalignedRuns";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kMissingLabels: return "MissingLabels";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kInvalidDistanceMatrix: return "InvalidDistanceMatrix";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kIncompatibleModel: return "IncompatibleModel";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kDomainError:
    case ErrorCode::kZeroEmbedding:
      return ErrorCategory::kNumeric;
    case ErrorCode::kConfigError:
      return ErrorCategory::kConfig;
    default:
      return ErrorCategory::kData;
  }
}

}  // namespace cood
