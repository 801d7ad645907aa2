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

#include "nclab/linalg.hpp"

#include <cmath>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return "invalid-input";
    case ErrorKind::kDegeneracy:
      return "degeneracy";
    case ErrorKind::kUnbounded:
      return "unbounded";
    case ErrorKind::kUnsupported:
      return "unsupported";
    case ErrorKind::kPrecondition:
      return "precondition";
    case ErrorKind::kNoUnitary:
      return "no-unitary";
    case ErrorKind::kAmbiguous:
      return "ambiguous";
    case ErrorKind::kWindowTooSmall:
      return "window-too-small";
  }
  return "unknown";
}

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        return false;
      }
    }
  }
  return true;
}

double operator_norm(const ComplexMatrix& m) {
  if (!all_finite(m)) {
    throw Error(ErrorKind::kInvalidInput, "operator_norm: non-finite entries");
  }
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

HermitianEig hermitian_eig(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kInvalidInput, "hermitian_eig: matrix is not square");
  }
  if (!all_finite(m)) {
    throw Error(ErrorKind::kInvalidInput, "hermitian_eig: non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > Tolerances::kHermitian * scale * std::max<double>(1, m.rows())) {
    throw Error(ErrorKind::kInvalidInput,
                "hermitian_eig: input is not Hermitian (residual " +
                    std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  return {es.eigenvalues(), es.eigenvectors()};
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

std::vector<ComplexMatrix> orthonormalize(std::span<const ComplexMatrix> vectors,
                                          const InnerProduct& inner) {
  std::vector<ComplexMatrix> out;
  out.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const double original = std::sqrt(std::abs(inner(vectors[i], vectors[i])));
    ComplexMatrix w = vectors[i];
    // Two passes of MGS keep the Gram matrix at machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) w -= inner(q, w) * q;
    }
    // The Gram pivot is the squared residual norm.
    const double pivot = std::abs(inner(w, w));
    const double norm = std::sqrt(pivot);
    if (!(pivot > Tolerances::kGramPivot * std::max(1.0, original * original))) {
      throw Error(ErrorKind::kDegeneracy,
                  "orthonormalize: vector " + std::to_string(i) +
                      " is numerically dependent (pivot " +
                      std::to_string(pivot) + ")");
    }
    out.push_back(w / norm);
  }
  return out;
}

ComplexMatrix pauli(int label) {
  ComplexMatrix s(2, 2);
  switch (label) {
    case 1:
      s << 0, 1, 1, 0;
      break;
    case 2:
      s << 0, -kI, kI, 0;
      break;
    case 3:
      s << 1, 0, 0, -1;
      break;
    case 4:
      s << 1, 0, 0, 1;
      break;
    default:
      throw Error(ErrorKind::kInvalidInput,
                  "pauli: label must be in 1..4, got " + std::to_string(label));
  }
  return s;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

ComplexMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  return m;
}

ComplexMatrix random_unitary(int n, std::mt19937_64& rng) {
  const ComplexMatrix z = random_complex(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phases of R's diagonal so the distribution is Haar.
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double ad = std::abs(d);
    if (ad > 0) q.col(j) *= d / ad;
  }
  return q;
}

ComplexMatrix random_hermitian(int n, std::mt19937_64& rng) {
  const ComplexMatrix x = random_complex(n, n, rng);
  return (x + x.adjoint()) / 2.0;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 over the combined key.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace nclab
