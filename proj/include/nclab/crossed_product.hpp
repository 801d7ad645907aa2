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

#include <map>
#include <memory>
#include <variant>
#include <vector>

#include "nclab/isometries.hpp"

namespace nclab {

struct TrivialAction {};
/// Add one with carry, starting from the first (least significant) slot.
struct OdometerAction {};
/// The ℤ-action n ↦ generator^n; the generator must lie in Iso.
struct IsoPowerAction {
  AutomorphismSpec generator;
};

using ActionSpec = std::variant<TrivialAction, OdometerAction, IsoPowerAction>;

std::string action_name(const ActionSpec& a);

/// Scalar cocycle c(g) = χ^g · 1.
struct Cocycle {
  Complex chi{1.0, 0.0};

  Complex at(int g) const;
};

enum class SiteMap { kIdentity, kNegation };

/// The odometer as a tree portrait: a node flips when every earlier bit is 1.
TreePortrait odometer_portrait(int depth);

/// Sites −L..L of ℤ with the length function l(n) = n.
struct GroupWindow {
  int radius = 2;

  int sites() const { return 2 * radius + 1; }
  bool contains(int g) const { return g >= -radius && g <= radius; }
};

/**
 * Finite window of the crossed-product triple. The half space is
 * H ⊗ ℓ²(window) with the H index major; the full space is two copies.
 */
class LiftedTriple {
 public:
  LiftedTriple(std::shared_ptr<const TruncatedTriple> base, ActionSpec action, int radius);

  const TruncatedTriple& base() const { return *base_; }
  std::shared_ptr<const TruncatedTriple> base_ptr() const { return base_; }
  const ActionSpec& action() const { return action_; }
  const GroupWindow& window() const { return window_; }
  int radius() const { return window_.radius; }
  Eigen::Index half_dim() const { return half_; }
  Eigen::Index dim() const { return 2 * half_; }

  Eigen::Index index(Eigen::Index xi, int g) const;

  /// Coefficient matrix of α_g for |g| ≤ 2L.
  const ComplexMatrix& action_matrix(int g) const;
  AlgebraElement act(int g, const AlgebraElement& a) const;

  /// D ⊗ 1 − i 1 ⊗ M_l, the upper-right block of the lifted Dirac operator.
  const ComplexMatrix& upper_block() const { return upper_; }
  ComplexMatrix dirac() const;

 private:
  std::shared_ptr<const TruncatedTriple> base_;
  ActionSpec action_;
  GroupWindow window_;
  Eigen::Index half_ = 0;
  std::vector<ComplexMatrix> powers_;  // α_g at g + 2L
  ComplexMatrix upper_;
};

/// Throws invalid-input when the action is not a verified state-preserving automorphism.
LiftedTriple build_lifted(std::shared_ptr<const TruncatedTriple> base, const ActionSpec& action,
                          int radius);

/// Σ_g a_g λ_g with finite support.
struct CrossedElement {
  std::map<int, AlgebraElement> terms;

  int radius() const;
};

CrossedElement crossed_multiply(const LiftedTriple& lifted, const CrossedElement& x,
                                const CrossedElement& y);
CrossedElement crossed_adjoint(const LiftedTriple& lifted, const CrossedElement& x);

/**
 * π(aλ_g)(ξ ⊗ δ_h) = π(α_{−(g+h)}(a))ξ ⊗ δ_{g+h} on the half space; sites
 * leaving the window are dropped.
 */
ComplexMatrix represent_crossed(const LiftedTriple& lifted, const CrossedElement& x);

ComplexMatrix doubled(const ComplexMatrix& half);

/// Operator norm of the columns over sites |g| ≤ L − margin.
double interior_norm(const LiftedTriple& lifted, const ComplexMatrix& m, int margin);

/// Operator norm of [D_l, M ⊕ M] restricted to interior columns.
double interior_commutator_norm(const LiftedTriple& lifted, const ComplexMatrix& half, int margin);

/**
 * U(ξ ⊗ δ_g) = χ^{σ(g)} U_β ξ ⊗ δ_{σ(g)} on the half space. Checks that β
 * intertwines the action (β∘α_1 = α_{σ(1)}∘β) and, unless disabled, that
 * β lies in Iso of the base.
 */
ComplexMatrix lifted_unitary(const LiftedTriple& lifted, const Cocycle& c,
                             const AutomorphismSpec& beta, SiteMap sigma, bool require_iso = true);

/// Φ(Σ a_g λ_g) = Σ χ^{σ(g)} β(a_g) λ_{σ(g)}.
CrossedElement transport(const LiftedTriple& lifted, const Cocycle& c,
                         const AutomorphismSpec& beta, SiteMap sigma, const CrossedElement& x);

struct LiftResidual {
  double residual = 0.0;
  bool passes = false;
};

LiftResidual lift_commutation_check(const LiftedTriple& lifted, const ComplexMatrix& u,
                                    int margin = 1);

/// Interior norm of π(Φ(x)) U − U π(x).
double covariance_check(const LiftedTriple& lifted, const Cocycle& c,
                        const AutomorphismSpec& beta, SiteMap sigma, const CrossedElement& x,
                        bool require_iso = true);

struct StabilityRow {
  int radius = 0;
  double norm = 0.0;
};

/// Interior ‖[D_l, π(x)]‖ for windows L = R+1 .. R+5.
std::vector<StabilityRow> crossed_commutator_stability(std::shared_ptr<const TruncatedTriple> base,
                                                       const ActionSpec& action,
                                                       const CrossedElement& x);

}  // namespace nclab
