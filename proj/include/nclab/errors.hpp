// Copyright 2026 The nclab Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nclab {

enum class ErrorKind {
  kInvalidInput,
  kDegeneracy,
  kUnbounded,
  kUnsupported,
  kPrecondition,
  kNoUnitary,
  kAmbiguous,
  kWindowTooSmall,
};

std::string_view to_string(ErrorKind kind);

/** Every failure raised by the library carries one of the kinds above. */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/** Numerical thresholds shared by all modules. */
struct Tolerances {
  /// Structural identities: unitarity, homomorphism, Gram identity.
  static constexpr double kStructural = 1e-10;
  /// Optimization-level agreement.
  static constexpr double kOptimization = 1e-6;
  /// Singular value accuracy.
  static constexpr double kNorm = 1e-12;
  /// Smallest admissible Gram pivot during orthonormalization.
  static constexpr double kGramPivot = 1e-10;
  /// Hermiticity check, relative to the operator norm.
  static constexpr double kHermitian = 1e-12;
  /// Commutator residual below which a unitary commutes with D.
  static constexpr double kIsoResidual = 1e-9;
  /// Residuals in (kIsoResidual, kIsoAmbiguity) are refused as ambiguous.
  static constexpr double kIsoAmbiguity = 1e-3;
  /// Slack allowed on a witness commutator norm.
  static constexpr double kFeasibility = 1e-9;
  /// Largest parameter count accepted by the distance solver.
  static constexpr int kMaxParameters = 20000;
};

}  // namespace nclab
