/* Copyright 2026 The CACP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CACP_ERROR_HPP_
#define CACP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cacp {

enum class ErrorCode {
  kMalformedManifest,
  kShapeMismatch,
  kChainBroken,
  kIoFailure,
  kInvalidSpec,
  kInvalidRate,
  kCursorMismatch,
  kInfeasibleBudget,
  kPlanMismatch,
  kEmptyLayer,
  kDivergedParameters,
  kShapeError,
  kNoFeasibleAssignment,
  kCorruptPolicy,
  kInvalidConfig,
};

constexpr std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedManifest: return "MalformedManifest";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kChainBroken: return "ChainBroken";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidRate: return "InvalidRate";
    case ErrorCode::kCursorMismatch: return "CursorMismatch";
    case ErrorCode::kInfeasibleBudget: return "InfeasibleBudget";
    case ErrorCode::kPlanMismatch: return "PlanMismatch";
    case ErrorCode::kEmptyLayer: return "EmptyLayer";
    case ErrorCode::kDivergedParameters: return "DivergedParameters";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kNoFeasibleAssignment: return "NoFeasibleAssignment";
    case ErrorCode::kCorruptPolicy: return "CorruptPolicy";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` distinguishes failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorName(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cacp

#endif  // CACP_ERROR_HPP_
