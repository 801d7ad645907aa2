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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nclab/af_model.hpp"
#include "nclab/connes_metric.hpp"
#include "nclab/gns_dirac.hpp"

namespace nclab {

/// Unitary acting on the contiguous slots first..first+count-1 (0-based).
struct BlockUnitary {
  int first = 0;
  int count = 1;
  ComplexMatrix unitary;
};

/**
 * ad W on UHF(k)^N with W = (Π blocks) · (⊗ u_s) · P, where P moves the
 * tensor factor in slot s to slot permutation[s].
 */
struct UhfAutomorphism {
  std::vector<int> permutation;      // empty = identity
  std::vector<ComplexMatrix> locals; // empty or one k×k unitary per slot
  std::vector<BlockUnitary> blocks;  // applied last, in list order
};

/// Tree automorphism: g(x)_i = x_i ⊕ bits[node(x_1..x_{i-1})], nodes in
/// breadth-first order (node of a prefix p of length m is 2^m − 1 + p).
struct TreePortrait {
  std::vector<int> bits;
};

/// α(1_x) = 1_{image[x]} on the 2^N leaves.
struct LeafPermutation {
  std::vector<int> image;
};

/// The flip σ_1 acting on the first tensor slot of UHF(2).
struct FlipM2 {};

using AutomorphismSpec = std::variant<UhfAutomorphism, TreePortrait, LeafPermutation, FlipM2>;

std::string automorphism_name(const AutomorphismSpec& a);

/// Unitary W with α = ad W (UHF variants only).
ComplexMatrix uhf_implementer(const AfAlgebra& algebra, const AutomorphismSpec& a);

/// Leaf map of a Cantor variant.
std::vector<int> leaf_map(const AfAlgebra& algebra, const AutomorphismSpec& a);

/**
 * Matrix of α on canonical coefficients at the full depth: column i holds
 * the coefficients of α(e_i). Validates the specification and checks
 * multiplicativity on sampled basis pairs (invalid-input error on failure).
 */
ComplexMatrix automorphism_matrix(const AfAlgebra& algebra, const AutomorphismSpec& a);

/// max over sampled basis pairs of |α(e_i e_j) − α(e_i)α(e_j)|.
double multiplicativity_defect(const AfAlgebra& algebra, const ComplexMatrix& alpha,
                               int samples, std::uint64_t seed);

/// Apply a coefficient matrix to an element (embedding to the full depth).
AlgebraElement apply_automorphism(const ComplexMatrix& alpha, const AlgebraElement& x);

/// max_i |φ(α(e_i)) − φ(e_i)|.
double state_defect(const AfAlgebra& algebra, const StateSpec& state,
                    const ComplexMatrix& alpha);

/**
 * U(aξ) = α(a)ξ on the GNS space. Throws no-unitary when α does not
 * preserve the state.
 */
ComplexMatrix implementing_unitary(const GnsSpace& gns, const ComplexMatrix& alpha);
ComplexMatrix implementing_unitary(const GnsSpace& gns, const AutomorphismSpec& a);

/// Level i (1..N) is true iff α maps the grade ≤ i coefficients into themselves.
std::vector<bool> filtration_check(const AfAlgebra& algebra, const ComplexMatrix& alpha,
                                   const std::vector<int>& levels);
std::vector<bool> filtration_check(const AfAlgebra& algebra, const AutomorphismSpec& a,
                                   const std::vector<int>& levels);

struct IsoVerdict {
  bool state_preserved = false;
  std::vector<bool> filtration_levels_preserved;  // levels 1..N
  std::optional<ComplexMatrix> implementing_unitary;
  std::optional<double> commutator_residual;
  bool in_iso = false;
};

/// Requires a triple at the full depth. Residuals between the Iso threshold
/// and the ambiguity guard raise an ambiguous error.
IsoVerdict iso_check(const TruncatedTriple& triple, const ComplexMatrix& alpha);
IsoVerdict iso_check(const TruncatedTriple& triple, const AutomorphismSpec& a);

/// Levels n with λ_n < λ_{n+1} plus the top level: the ends of eigenvalue blocks.
std::vector<int> block_levels(const std::vector<double>& lambdas);

AutomorphismSpec compose(const AfAlgebra& algebra, const AutomorphismSpec& outer,
                         const AutomorphismSpec& inner);
AutomorphismSpec inverse(const AfAlgebra& algebra, const AutomorphismSpec& a);

/// Portrait of a leaf permutation, if it is a tree automorphism.
std::optional<TreePortrait> portrait_of(int depth, const std::vector<int>& image);
std::vector<int> portrait_leaf_map(int depth, const TreePortrait& g);

// ---------------------------------------------------------------------------
// Experiments

struct EnumerationReport {
  int depth = 0;
  int log2_expected_order = 0;           // 2^N − 1
  std::uint64_t portraits_checked = 0;
  std::uint64_t portraits_in_iso = 0;
  bool portraits_exhaustive = false;
  std::uint64_t permutations_scanned = 0; // (2^N)! when exhaustive
  std::uint64_t permutations_in_iso = 0;
  bool scan_matches_portraits = false;
  bool composition_law_holds = false;
  /// Group order certified by exhaustive enumeration (0 when sampled).
  std::uint64_t order = 0;
};

using ProgressCallback = std::function<void(std::uint64_t done, std::uint64_t total)>;

/**
 * Cantor isometry group at depth N. Portraits are enumerated exhaustively for
 * N ≤ 4; deeper trees check generators plus seeded samples. The leaf scan
 * over all (2^N)! permutations requires N ≤ 3.
 */
EnumerationReport enumerate_cantor_iso(const TruncatedTriple& triple, bool exhaustive_scan,
                                       const ProgressCallback& progress = {},
                                       std::uint64_t seed = 7);

struct SwitchReport {
  int k = 0;
  DistanceResult before;
  DistanceResult after;
  double gap = 0.0;            // |upper_before − upper_after|
  double certified_gap = 0.0;  // gap guaranteed by the lower/upper bounds
  bool violation = false;
};

/// Distances tr vs ω_v and tr vs ω_{1^{⊗k}⊗v} for v of level 1 with a pure Bloch state.
SwitchReport switch_iso_violation(std::shared_ptr<const TruncatedTriple> triple, int k,
                                  const AlgebraElement& v, const SolverConfig& cfg = {});

/// First k ≥ 1 with a certified gap, or nullopt.
std::optional<SwitchReport> first_switch_violation(std::shared_ptr<const TruncatedTriple> triple,
                                                   const AlgebraElement& v,
                                                   const SolverConfig& cfg = {});

struct FlipReport {
  double d1 = 0.0, d2 = 1.0;
  double commutator_norm = 0.0;          // ‖[D,U]‖
  double commutator_frobenius = 0.0;     // Hilbert–Schmidt norm of [D,U]
  double identity_residual = 0.0;        // max ‖[D,U*aU] + U*[D,a]U‖
  int pairs = 0;
  double max_deviation = 0.0;            // finite pairs, brute force
  double max_closed_form_error = 0.0;
  int unbounded_pairs = 0;
  bool unbounded_preserved = true;
  bool flip_not_in_iso = false;
};

FlipReport flip_demo(double d1 = 0.0, double d2 = 1.0, int pairs = 100, std::uint64_t seed = 11);

struct ShiftReport {
  double lhs = 0.0;  // ‖[D,x]‖
  double rhs = 0.0;  // c^{-1} λ_n^{-1} λ_1 ‖[D, shift(x,n)]‖
  bool holds = false;
};

ShiftReport shift_inequality_check(const TruncatedTriple& triple, const AlgebraElement& x,
                                   int n, double c);

/// Special case 2λ_1 < λ_2: ‖[D, shift(x,1)]‖ ≥ ((λ_2 − λ_1)/λ_1)‖[D,x]‖.
ShiftReport shift_special_case(const TruncatedTriple& triple, const AlgebraElement& x);

struct MClassReport {
  double gamma = 0.0;
  int depth = 0;
  int pairs = 0;
  std::vector<int> class_sizes;      // indexed by m = 0..N-1
  std::vector<double> class_values;  // mean distance per class
  double max_spread = 0.0;
  double min_gap = 0.0;
  bool portraits_preserve_m = false;
  bool violator_changes_m = false;
  bool violator_in_iso = true;
  /// Largest |d(δ_{p(x)}, δ_{p(y)}) − d(δ_x, δ_y)| under the violating permutation.
  double violator_distance_change = 0.0;
};

/// d_γ(δ_x, δ_y) over all leaf pairs, grouped by the first differing bit.
MClassReport m_invariance_experiment(double gamma, int depth, const SolverConfig& cfg = {},
                                     std::uint64_t seed = 5);

}  // namespace nclab
