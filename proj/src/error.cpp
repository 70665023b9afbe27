// Copyright 2026 The bohmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bohm/error.hpp"

namespace bohm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonPowerOfTwo: return "NonPowerOfTwo";
    case ErrorCode::kEmptyDomain: return "EmptyDomain";
    case ErrorCode::kMemoryBudgetExceeded: return "MemoryBudgetExceeded";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNonHermitianPotential: return "NonHermitianPotential";
    case ErrorCode::kStepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorCode::kTimeGridMismatch: return "TimeGridMismatch";
    case ErrorCode::kNodeEncountered: return "NodeEncountered";
    case ErrorCode::kSeparationGateFailed: return "SeparationGateFailed";
    case ErrorCode::kAmbiguousPointer: return "AmbiguousPointer";
    case ErrorCode::kFidelityGateFailed: return "FidelityGateFailed";
    case ErrorCode::kNonOrthonormalBasis: return "NonOrthonormalBasis";
    case ErrorCode::kDomainTooSmall: return "DomainTooSmall";
    case ErrorCode::kSeparationTooSmall: return "SeparationTooSmall";
    case ErrorCode::kFactorizableSpec: return "FactorizableSpec";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace bohm
