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

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "nclab/af_model.hpp"
#include "nclab/linalg.hpp"

namespace nclab {

/**
 * Eigenvalue sequence of the Dirac operator. λ_0 = 0 always; λ_n for n ≥ 1
 * is given explicitly, by γ^{-n+1} (geometric) or by b^{n-1} (power).
 */
struct DiracSpec {
  enum class Kind { kExplicit, kGeometric, kPower };

  Kind kind = Kind::kExplicit;
  std::vector<double> values;  // λ_1.. for kExplicit
  double parameter = 0.0;      // γ or b

  static DiracSpec explicit_values(std::vector<double> lambdas);
  static DiracSpec geometric(double gamma);
  static DiracSpec power(double base);

  /// (λ_0, ..., λ_depth); throws invalid-input on a malformed sequence.
  std::vector<double> eigenvalues(int depth) const;
};

struct DiracFlags {
  bool strictly_increasing = false;
  bool pairwise_distinct = false;
  bool nondecreasing = false;
};

/// Flags of λ_1..λ_N (λ_0 = 0 is excluded from the comparison).
DiracFlags dirac_flags(const std::vector<double>& lambdas);

/**
 * GNS space of a faithful state on A_depth. Vectors are stored as coordinates
 * on an orthonormal basis f_j; `transform()` maps these coordinates to
 * canonical coefficients (column j holds f_j). The basis is graded: f_j has
 * the grade of canonical index j, and the transform is block upper
 * triangular, so leading blocks describe the lower levels.
 */
class GnsSpace {
 public:
  GnsSpace(AlgebraPtr algebra, StateSpec state);

  const AfAlgebra& algebra() const { return *algebra_; }
  const AlgebraPtr& algebra_ptr() const { return algebra_; }
  const StateSpec& state() const { return state_; }
  std::size_t dim() const { return algebra_->dim(algebra_->depth()); }
  int grade_of(std::size_t j) const { return algebra_->grade(j); }
  bool identity_transform() const { return identity_; }
  const ComplexMatrix& transform() const { return transform_; }
  const ComplexMatrix& inverse_transform() const { return inverse_; }

  /// Gram matrix φ(e_i^* e_j) of the canonical basis at `level`.
  ComplexMatrix canonical_gram(int level) const;

 private:
  void build_product(const ProductState& p);
  void build_general();

  AlgebraPtr algebra_;
  StateSpec state_;
  bool identity_ = false;
  ComplexMatrix transform_;
  ComplexMatrix inverse_;
};

/**
 * The spectral triple truncated to H_level with D = Σ λ_n Q_n.
 *
 * Every operator is a matrix on the orthonormal GNS basis, whose grade-major
 * ordering makes P_n a leading principal block and D diagonal.
 */
class TruncatedTriple {
 public:
  TruncatedTriple(std::shared_ptr<const GnsSpace> gns, DiracSpec dirac, int level);

  const GnsSpace& gns() const { return *gns_; }
  const std::shared_ptr<const GnsSpace>& gns_ptr() const { return gns_; }
  const AfAlgebra& algebra() const { return gns_->algebra(); }
  const AlgebraPtr& algebra_ptr() const { return gns_->algebra_ptr(); }
  const StateSpec& state() const { return gns_->state(); }
  const DiracSpec& dirac_spec() const { return dirac_; }
  int level() const { return level_; }
  std::size_t dim() const { return algebra().dim(level_); }

  /// (λ_0, ..., λ_level).
  const std::vector<double>& lambdas() const { return lambdas_; }
  double lambda(int n) const { return lambdas_.at(n); }
  DiracFlags flags() const { return dirac_flags(lambdas_); }

  const RealVector& dirac_diagonal() const { return diag_; }
  ComplexMatrix dirac() const;

  /// Half-open index range [begin, end) of Q_n.
  std::pair<std::size_t, std::size_t> q_range(int n) const;
  ComplexMatrix q_projection(int n) const;
  ComplexMatrix p_projection(int n) const;

  /// π(a) on H_level; requires level(a) ≤ level.
  ComplexMatrix represent(const AlgebraElement& a) const;
  /// [D, π(a)].
  ComplexMatrix commutator(const AlgebraElement& a) const;
  double commutator_norm(const AlgebraElement& a) const;
  /// D·M − M·D for an operator M on H_level.
  ComplexMatrix commutator_with(const ComplexMatrix& m) const;

  /// Table ‖Q_i M Q_j‖ for i, j in 0..level.
  RealMatrix block_norms(const ComplexMatrix& m) const;
  RealMatrix block_norms(const AlgebraElement& a) const;

  /// Restriction to H_l, l ≤ level.
  TruncatedTriple at_level(int l) const;

 private:
  std::shared_ptr<const GnsSpace> gns_;
  DiracSpec dirac_;
  int level_;
  std::vector<double> lambdas_;
  RealVector diag_;
};

/// Triple at the full depth of the filtration.
TruncatedTriple build_triple(const FiltrationSpec& filtration, const StateSpec& state,
                             const DiracSpec& dirac);
TruncatedTriple build_triple(AlgebraPtr algebra, const StateSpec& state,
                             const DiracSpec& dirac);

}  // namespace nclab
