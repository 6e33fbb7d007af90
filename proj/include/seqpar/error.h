// Copyright 2026 The seqpar Authors
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

#ifndef SEQPAR_ERROR_H_
#define SEQPAR_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqpar {

enum class ErrorCode {
  kShape,
  kInvalidPlan,
  kInvalidLandmarkCount,
  kInvalidPermutation,
  kNumericDegenerate,
  kDegenerateMask,
  kProtocol,
  kConfig,
  kStall,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this one exception type; callers
// that care about the category switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape:
      return "shape error";
    case ErrorCode::kInvalidPlan:
      return "invalid plan";
    case ErrorCode::kInvalidLandmarkCount:
      return "invalid landmark count";
    case ErrorCode::kInvalidPermutation:
      return "invalid permutation";
    case ErrorCode::kNumericDegenerate:
      return "numeric degenerate";
    case ErrorCode::kDegenerateMask:
      return "degenerate mask";
    case ErrorCode::kProtocol:
      return "protocol error";
    case ErrorCode::kConfig:
      return "config error";
    case ErrorCode::kStall:
      return "stall";
  }
  return "error";
}

}  // namespace seqpar

#endif  // SEQPAR_ERROR_H_
