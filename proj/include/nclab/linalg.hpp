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

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nclab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

bool all_finite(const ComplexMatrix& m);

/// Largest singular value, from a full SVD.
double operator_norm(const ComplexMatrix& m);

struct HermitianEig {
  RealVector values;  // ascending
  ComplexMatrix vectors;
};

/// Spectral decomposition of a Hermitian matrix; rejects non-Hermitian input.
HermitianEig hermitian_eig(const ComplexMatrix& m);

/// (kron(A,B))[i*rB + k, j*cB + l] = A[i,j] * B[k,l].
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

using InnerProduct =
    std::function<Complex(const ComplexMatrix&, const ComplexMatrix&)>;

/**
 * Modified Gram-Schmidt under an arbitrary inner product.
 *
 * The i-th output spans the same space as the first i inputs, and its
 * component along input i is positive, so already-orthonormal input comes
 * back unchanged. Throws a degeneracy error when a pivot falls below
 * Tolerances::kGramPivot.
 */
std::vector<ComplexMatrix> orthonormalize(std::span<const ComplexMatrix> vectors,
                                          const InnerProduct& inner);

/// Pauli matrices sigma_1..sigma_3, with label 4 the identity.
ComplexMatrix pauli(int label);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Haar-distributed unitary of size n.
ComplexMatrix random_unitary(int n, std::mt19937_64& rng);

/// Gaussian complex matrix with unit-variance entries.
ComplexMatrix random_complex(int rows, int cols, std::mt19937_64& rng);

/// Random Hermitian matrix (X + X^*)/2 from a Gaussian X.
ComplexMatrix random_hermitian(int n, std::mt19937_64& rng);

/// Deterministic substream seed for the i-th consumer of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace nclab
