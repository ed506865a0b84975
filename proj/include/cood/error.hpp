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

#ifndef COOD_ERROR_HPP_
#define COOD_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cood {

enum class ErrorCode {
  // numeric
  kNotPositiveDefinite,
  kDomainError,
  // shape / argument
  kShapeMismatch,
  kTooFewSamples,
  kBatchTooSmall,
  kZeroEmbedding,
  kLabelOutOfRange,
  kIncompatibleInput,
  kWindowOutOfBounds,
  kEmptySide,
  kEmptyList,
  kMisalignedRuns,
  kNotNormalized,
  kEmptySet,
  kUnknownClass,
  kMissingLabels,
  kEmptyClass,
  kInvalidDistanceMatrix,
  // data
  kEmptyDataset,
  kMalformedFile,
  kEmptyAfterFilter,
  kIncompatibleModel,
  kIoError,
  // configuration
  kConfigError,
};

enum class ErrorCategory { kConfig, kData, kNumeric };

std::string_view ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

// All library failures are reported by throwing Error. The C API converts
// these to status codes at the boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace cood

#endif  // COOD_ERROR_HPP_
