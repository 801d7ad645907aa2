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
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nclab/linalg.hpp"

namespace nclab {

enum class Family { kUhf, kCantor };

/**
 * A truncated filtration A_0 = C1 ⊂ A_1 ⊂ ... ⊂ A_depth.
 *
 * UHF(k): A_n = M_k^{⊗n}, dimension k^{2n}. Cantor: A_n = C^{2^n}, the
 * functions constant on the cylinders of words of length n.
 */
struct FiltrationSpec {
  Family family = Family::kUhf;
  int k = 2;
  int depth = 1;

  static FiltrationSpec uhf(int k, int depth);
  static FiltrationSpec cantor(int depth);

  std::size_t level_dim(int n) const;
  std::string tag() const;

  bool operator==(const FiltrationSpec&) const = default;
};

/**
 * Label of a canonical basis element.
 *
 * UHF: one label per slot, 1..k^2 with k^2 the identity; the word always has
 * `depth` entries. Cantor: the bits of the tree node carrying the Haar
 * wavelet (empty for both the constant function and the root wavelet, which
 * are told apart by the grade).
 */
struct BasisIndex {
  std::vector<int> word;
  int grade = 0;

  bool operator==(const BasisIndex&) const = default;
};

/**
 * Structure of one truncated AF-algebra: the canonical self-adjoint basis,
 * orthonormal for the normalized trace (UHF) or uniform measure (Cantor),
 * ordered by (grade, word), so the level-n basis is a prefix of the level-N
 * basis.
 */
class AfAlgebra {
 public:
  static std::shared_ptr<const AfAlgebra> create(const FiltrationSpec& spec);

  const FiltrationSpec& spec() const { return spec_; }
  int depth() const { return spec_.depth; }
  bool is_uhf() const { return spec_.family == Family::kUhf; }
  bool is_cantor() const { return spec_.family == Family::kCantor; }

  std::size_t dim(int level) const;
  std::span<const BasisIndex> canonical_basis(int level) const;
  const BasisIndex& basis_index(std::size_t i) const { return basis_[i]; }
  int grade(std::size_t i) const { return basis_[i].grade; }

  /// Index of a UHF word; shorter words are padded with identity slots.
  std::size_t uhf_index(std::span<const int> word) const;
  /// Index of the Cantor wavelet with the given grade at `node`.
  std::size_t cantor_index(int grade, std::span<const int> node) const;

  int local_dim() const { return spec_.k; }
  int identity_label() const { return spec_.k * spec_.k; }
  /// Single-slot basis matrix for a UHF label.
  const ComplexMatrix& slot_basis(int label) const;

  /// Values of each basis function on the 2^depth leaves (Cantor only).
  const RealMatrix& haar_values() const { return haar_; }
  int leaf_index(std::span<const int> bits) const;

  ComplexVector multiply(const ComplexVector& a, const ComplexVector& b,
                         int level) const;
  /// Matrix of b ↦ a·b on the level-`level` coefficient space.
  ComplexMatrix left_multiplication(const ComplexVector& a, int level) const;

  /// Dense matrix (UHF: k^level square; Cantor: diagonal of cell values).
  ComplexMatrix materialize(const ComplexVector& coeffs, int level) const;
  ComplexVector decompose(const ComplexMatrix& m, int level) const;

  /// Cantor: value on each of the 2^level cells.
  ComplexVector cell_values(const ComplexVector& coeffs, int level) const;
  ComplexVector from_cell_values(const ComplexVector& values, int level) const;

 private:
  explicit AfAlgebra(const FiltrationSpec& spec);
  void build_uhf();
  void build_cantor();

  struct Term {
    int label;
    Complex coeff;
  };

  FiltrationSpec spec_;
  std::vector<BasisIndex> basis_;
  std::vector<std::size_t> level_dims_;
  // UHF
  std::vector<ComplexMatrix> slot_basis_;           // indexed by label-1
  std::vector<std::vector<Term>> slot_products_;    // (a-1)*k^2 + (b-1)
  std::vector<std::size_t> code_to_index_;
  std::vector<int> words_;                          // flat, depth per index
  // Cantor
  RealMatrix haar_;
};

using AlgebraPtr = std::shared_ptr<const AfAlgebra>;

/** An element of A_level, stored as coefficients on the canonical basis. */
class AlgebraElement {
 public:
  AlgebraElement(AlgebraPtr algebra, int level, ComplexVector coeffs);

  static AlgebraElement zero(AlgebraPtr algebra, int level);
  static AlgebraElement identity(AlgebraPtr algebra, int level = 0);
  /// Basis element i, at the level equal to its grade.
  static AlgebraElement basis_element(AlgebraPtr algebra, std::size_t index);
  /// UHF tensor word; level = word length.
  static AlgebraElement from_word(AlgebraPtr algebra, std::vector<int> word,
                                  Complex coeff = 1.0);
  /// UHF: a k^n square matrix; Cantor: a diagonal of 2^n cell values.
  static AlgebraElement from_matrix(AlgebraPtr algebra, const ComplexMatrix& m);

  const AfAlgebra& algebra() const { return *algebra_; }
  const AlgebraPtr& algebra_ptr() const { return algebra_; }
  int level() const { return level_; }
  const ComplexVector& coeffs() const { return coeffs_; }
  Complex coeff(std::size_t index) const;

  AlgebraElement embed(int level) const;
  /// Inverse of embed; throws when coefficients above `level` are nonzero.
  AlgebraElement restrict_to(int level) const;
  AlgebraElement adjoint() const;
  bool is_self_adjoint(double tol = 1e-10) const;
  ComplexMatrix to_matrix() const;

  AlgebraElement operator+(const AlgebraElement& other) const;
  AlgebraElement operator-(const AlgebraElement& other) const;
  AlgebraElement operator*(Complex s) const;

 private:
  AlgebraPtr algebra_;
  int level_;
  ComplexVector coeffs_;
};

void require_same_algebra(const AlgebraElement& a, const AlgebraElement& b);

AlgebraElement multiply(const AlgebraElement& a, const AlgebraElement& b);

/// Trace-preserving conditional expectation onto A_n.
AlgebraElement conditional_expectation(const AlgebraElement& x, int n);

/// x ↦ 1^{⊗n} ⊗ x (UHF); f ↦ f∘shift^n on the Cantor set.
AlgebraElement shift_embed(const AlgebraElement& x, int n);

// ---------------------------------------------------------------------------
// States

struct TraceState {};
struct UniformMeasure {};
/// ω_v(x) = tr(v^* x v).
struct VectorState {
  AlgebraElement v;
};
/// Point evaluation at a leaf of the depth-N tree.
struct CharacterState {
  std::vector<int> point;
};
/// ⊗ Tr(ρ_i ·); slots beyond the list are tracial.
struct ProductState {
  std::vector<ComplexMatrix> densities;
};

using StateSpec = std::variant<TraceState, UniformMeasure, VectorState,
                               CharacterState, ProductState>;

std::string state_name(const StateSpec& s);

/// Checks normalization, positivity and family compatibility.
void validate_state(const AfAlgebra& algebra, const StateSpec& s);

/// The values s(e_i) on the level-`level` canonical basis.
ComplexVector state_moments(const AfAlgebra& algebra, const StateSpec& s,
                            int level);

Complex evaluate_state(const StateSpec& s, const AlgebraElement& x);

bool is_tracial(const StateSpec& s);

}  // namespace nclab
