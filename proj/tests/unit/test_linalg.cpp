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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nclab/errors.hpp"
#include "nclab/linalg.hpp"

using namespace nclab;

TEST_CASE("operator norm of simple matrices") {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 2;
  d(1, 1) = -3;
  d(2, 2) = 1;
  CHECK(operator_norm(d) == doctest::Approx(3.0).epsilon(1e-12));
  ComplexMatrix r = ComplexMatrix::Zero(2, 2);
  r(0, 1) = std::sqrt(2.0);
  CHECK(std::abs(operator_norm(r) - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("operator norm is multiplicative under kron") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix a = random_complex(3, 3, rng);
    const ComplexMatrix b = random_complex(3, 3, rng);
    Eigen::JacobiSVD<ComplexMatrix> svd(kron(a, b));
    CHECK(std::abs(svd.singularValues()(0) - operator_norm(a) * operator_norm(b)) < 1e-10);
  }
}

TEST_CASE("operator norm invariances") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix m = random_complex(5, 5, rng);
    const ComplexMatrix u = random_unitary(5, rng);
    const ComplexMatrix v = random_unitary(5, rng);
    const double n = operator_norm(m);
    CHECK(std::abs(operator_norm(u * m * v) - n) < 1e-10);
    CHECK(std::abs(operator_norm(m.adjoint()) - n) < 1e-10);
    const Complex s(0.3, -1.7);
    CHECK(std::abs(operator_norm(s * m) - std::abs(s) * n) < 1e-10);
  }
}

TEST_CASE("operator norm rejects non-finite input") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = std::nan("");
  try {
    operator_norm(m);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidInput);
  }
}

TEST_CASE("hermitian eigendecomposition") {
  auto id = hermitian_eig(ComplexMatrix::Identity(4, 4));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(id.values(i) - 1.0) < 1e-14);
  auto s1 = hermitian_eig(pauli(1));
  CHECK(std::abs(s1.values(0) + 1.0) < 1e-14);
  CHECK(std::abs(s1.values(1) - 1.0) < 1e-14);

  std::mt19937_64 rng(3);
  const ComplexMatrix h = random_hermitian(8, rng);
  auto e = hermitian_eig(h);
  const ComplexMatrix rec = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  CHECK((rec - h).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() <
        1e-10);
  for (int i = 1; i < 8; ++i) CHECK(e.values(i - 1) <= e.values(i));

  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eig(bad), Error);
}

TEST_CASE("commutator of self-adjoint operators has real spectrum after multiplying by i") {
  std::mt19937_64 rng(5);
  const ComplexMatrix d = random_hermitian(6, rng);
  const ComplexMatrix x = random_hermitian(6, rng);
  const ComplexMatrix c = kI * commutator(d, x);
  CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_NOTHROW(hermitian_eig(c));
}

TEST_CASE("kron identities") {
  CHECK((kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)) -
         ComplexMatrix::Identity(4, 4))
            .norm() == 0.0);
  const ComplexMatrix zz = kron(pauli(3), pauli(3));
  CHECK(zz(0, 0) == Complex(1));
  CHECK(zz(1, 1) == Complex(-1));
  CHECK(zz(2, 2) == Complex(-1));
  CHECK(zz(3, 3) == Complex(1));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix a = random_complex(2, 2, rng);
    const ComplexMatrix b = random_complex(2, 2, rng);
    const ComplexMatrix c = random_complex(2, 2, rng);
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).cwiseAbs().maxCoeff() < 1e-14);
  }
  const ComplexMatrix a = random_complex(2, 3, rng);
  const ComplexMatrix b = random_complex(3, 2, rng);
  const ComplexMatrix k = kron(a, b);
  CHECK(k(1 * 3 + 2, 2 * 2 + 1) == a(1, 2) * b(2, 1));
}

TEST_CASE("orthonormalize") {
  const InnerProduct hs = [](const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a.adjoint() * b).trace() / static_cast<double>(a.rows());
  };
  std::vector<ComplexMatrix> paulis = {pauli(4), pauli(1), pauli(2), pauli(3)};
  auto same = orthonormalize(paulis, hs);
  for (int i = 0; i < 4; ++i) CHECK((same[i] - paulis[i]).cwiseAbs().maxCoeff() < 1e-12);

  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 0.75;
  rho(1, 1) = 0.25;
  const InnerProduct phi = [&](const ComplexMatrix& a, const ComplexMatrix& b) {
    return (rho * a.adjoint() * b).trace();
  };
  std::vector<ComplexMatrix> two = {pauli(4), pauli(3)};
  auto q = orthonormalize(two, phi);
  CHECK(std::abs(phi(q[0], q[1])) < 1e-12);
  CHECK(std::abs(phi(q[1], q[1]) - 1.0) < 1e-12);
  CHECK(std::abs(phi(q[0], q[0]) - 1.0) < 1e-12);

  // Haar functions at depth 2 as diagonal matrices, uniform measure.
  const InnerProduct mu = [](const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a.adjoint() * b).trace() / 4.0;
  };
  std::vector<ComplexMatrix> haar;
  const double r2 = std::sqrt(2.0);
  for (auto v : {std::array<double, 4>{1, 1, 1, 1}, std::array<double, 4>{1, 1, -1, -1},
                 std::array<double, 4>{r2, -r2, 0, 0}, std::array<double, 4>{0, 0, r2, -r2}}) {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) m(i, i) = v[i];
    haar.push_back(m);
  }
  auto h = orthonormalize(haar, mu);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(mu(h[i], h[j]) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  }

  std::vector<ComplexMatrix> dependent = {pauli(3), 2.0 * pauli(3)};
  try {
    orthonormalize(dependent, hs);
    FAIL("expected degeneracy");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegeneracy);
  }
}

TEST_CASE("pauli relations") {
  CHECK((pauli(1) * pauli(2) - kI * pauli(3)).norm() < 1e-15);
  for (int l = 1; l <= 3; ++l) {
    CHECK((pauli(l) * pauli(l) - pauli(4)).norm() < 1e-15);
  }
  CHECK_THROWS_AS(pauli(0), Error);
}

TEST_CASE("seed derivation is deterministic and spreads streams") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
}
