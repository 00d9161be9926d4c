// Copyright 2026 The Warmstart Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WARMSTART_ERROR_HPP_
#define WARMSTART_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace warmstart {

enum class ErrorCode {
  kNotPositiveDefinite,
  kNoConvergence,
  kDimensionMismatch,
  kInfeasibleScaling,
  kSchemaViolation,
  kEmptyFile,
  kZeroDirection,
  kNetworkError,
  kParseError,
  kRefusalError,
  kLabelOutOfRange,
  kRateNotRecoded,
  kArmNotAvailable,
  kZeroColdRegret,
  kConfigError,
  kIoError,
  kInvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// Every library failure is reported through this type; `code()` identifies
// the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace warmstart

#endif  // WARMSTART_ERROR_HPP_
