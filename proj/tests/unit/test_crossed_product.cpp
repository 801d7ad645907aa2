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
#include <numbers>
#include <random>

#include "nclab/crossed_product.hpp"
#include "nclab/errors.hpp"

using namespace nclab;

namespace {

std::shared_ptr<const TruncatedTriple> uhf_base() {
  return std::make_shared<const TruncatedTriple>(build_triple(
      FiltrationSpec::uhf(2, 2), TraceState{}, DiracSpec::explicit_values({1, 2})));
}

std::shared_ptr<const TruncatedTriple> cantor_base(int depth) {
  return std::make_shared<const TruncatedTriple>(
      build_triple(FiltrationSpec::cantor(depth), UniformMeasure{}, DiracSpec::geometric(1.0 / 3)));
}

AlgebraElement random_element(const AlgebraPtr& alg, std::mt19937_64& rng) {
  const auto d = static_cast<int>(alg->dim(alg->depth()));
  return AlgebraElement(alg, alg->depth(), random_complex(d, 1, rng).col(0));
}

CrossedElement random_crossed(const AlgebraPtr& alg, int radius, std::mt19937_64& rng) {
  CrossedElement x;
  for (int g = -radius; g <= radius; ++g) x.terms.emplace(g, random_element(alg, rng));
  return x;
}

UhfAutomorphism local_unitaries(std::mt19937_64& rng) {
  UhfAutomorphism u;
  u.locals = {random_unitary(2, rng), random_unitary(2, rng)};
  return u;
}

// Leaf map of "add one" where the first tree level is the least significant bit.
std::vector<int> odometer_oracle(int depth) {
  const int leaves = 1 << depth;
  auto reverse = [depth](int x) {
    int r = 0;
    for (int i = 0; i < depth; ++i) r |= ((x >> i) & 1) << (depth - 1 - i);
    return r;
  };
  std::vector<int> out(leaves);
  for (int x = 0; x < leaves; ++x) out[x] = reverse((reverse(x) + 1) % leaves);
  return out;
}

const std::vector<Complex> kCharacters = {
    {1.0, 0.0}, {0.0, 1.0}, std::polar(1.0, 2.0 * std::numbers::pi / 5.0)};

}  // namespace

TEST_CASE("odometer portrait adds one with carry") {
  for (int depth = 1; depth <= 4; ++depth) {
    CHECK(portrait_leaf_map(depth, odometer_portrait(depth)) == odometer_oracle(depth));
  }
  auto base = cantor_base(3);
  const auto v = iso_check(*base, AutomorphismSpec{odometer_portrait(3)});
  CHECK(v.in_iso);
  for (bool b : v.filtration_levels_preserved) CHECK(b);
}

TEST_CASE("cocycle identity for characters") {
  for (const Complex chi : kCharacters) {
    const Cocycle c{chi};
    for (int g = -4; g <= 4; ++g) {
      for (int h = -4; h <= 4; ++h) CHECK(std::abs(c.at(g + h) - c.at(g) * c.at(h)) < 1e-13);
    }
  }
}

TEST_CASE("lifted Dirac operator structure") {
  const LiftedTriple small = build_lifted(cantor_base(2), OdometerAction{}, 3);
  CHECK(small.dim() == 56);

  const LiftedTriple l = build_lifted(uhf_base(), TrivialAction{}, 3);
  const ComplexMatrix d = l.dirac();
  CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  ComplexMatrix grading = ComplexMatrix::Identity(l.dim(), l.dim());
  grading.bottomRightCorner(l.half_dim(), l.half_dim()) *= -1.0;
  CHECK((grading * d + d * grading).cwiseAbs().maxCoeff() == 0.0);
  const ComplexMatrix sq = d * d;
  CHECK(sq.topRightCorner(l.half_dim(), l.half_dim()).cwiseAbs().maxCoeff() < 1e-12);
  // D_l² = D² ⊗ 1 + 1 ⊗ M² on each copy.
  const RealVector& lam = l.base().dirac_diagonal();
  double worst = 0.0;
  for (Eigen::Index xi = 0; xi < lam.size(); ++xi) {
    for (int g = -3; g <= 3; ++g) {
      const auto i = l.index(xi, g);
      worst = std::max(worst, std::abs(sq(i, i) - (lam(xi) * lam(xi) + g * g)));
    }
  }
  CHECK(worst < 1e-12);
  const RealVector ev = hermitian_eig(d).values;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    CHECK(std::abs(ev(i) + ev(ev.size() - 1 - i)) < 1e-9);
  }
}

TEST_CASE("representation basics") {
  std::mt19937_64 rng(1);
  auto base = uhf_base();
  const LiftedTriple l = build_lifted(base, TrivialAction{}, 3);
  const auto a = random_element(base->algebra_ptr(), rng);
  CrossedElement x;
  x.terms.emplace(0, a);
  const ComplexMatrix expect = kron(base->represent(a), ComplexMatrix::Identity(7, 7));
  CHECK((represent_crossed(l, x) - expect).cwiseAbs().maxCoeff() < 1e-12);

  CrossedElement shift;
  shift.terms.emplace(1, AlgebraElement::identity(base->algebra_ptr()));
  const ComplexMatrix s = represent_crossed(l, shift);
  for (int h = -3; h <= 3; ++h) {
    for (int g = -3; g <= 3; ++g) {
      const Complex entry = s(l.index(5, g), l.index(5, h));
      CHECK(std::abs(entry - (g == h + 1 ? 1.0 : 0.0)) < 1e-12);
    }
  }
  CrossedElement wide = random_crossed(base->algebra_ptr(), 3, rng);
  CHECK_THROWS_AS(represent_crossed(l, wide), Error);
}

TEST_CASE("representation is multiplicative and adjoint-preserving on the interior") {
  std::mt19937_64 rng(2);
  for (ActionSpec action : {ActionSpec{TrivialAction{}}, ActionSpec{OdometerAction{}}}) {
    auto base = std::holds_alternative<TrivialAction>(action) ? uhf_base() : cantor_base(3);
    const LiftedTriple l = build_lifted(base, action, 4);
    const auto x = random_crossed(base->algebra_ptr(), 1, rng);
    const auto y = random_crossed(base->algebra_ptr(), 1, rng);
    const ComplexMatrix px = represent_crossed(l, x), py = represent_crossed(l, y);
    const ComplexMatrix pxy = represent_crossed(l, crossed_multiply(l, x, y));
    CHECK(interior_norm(l, px * py - pxy, 2) < 1e-10);
    const ComplexMatrix pstar = represent_crossed(l, crossed_adjoint(l, x));
    CHECK(interior_norm(l, pstar - px.adjoint(), 1) < 1e-10);
  }
}

TEST_CASE("group unitaries implement the odometer on the interior") {
  std::mt19937_64 rng(3);
  auto base = cantor_base(3);
  const LiftedTriple l = build_lifted(base, OdometerAction{}, 4);
  const auto a = random_element(base->algebra_ptr(), rng);
  for (int g = -2; g <= 2; ++g) {
    CrossedElement lg, lgi, pa, pag;
    lg.terms.emplace(g, AlgebraElement::identity(base->algebra_ptr()));
    lgi.terms.emplace(-g, AlgebraElement::identity(base->algebra_ptr()));
    pa.terms.emplace(0, a);
    pag.terms.emplace(0, l.act(g, a));
    const ComplexMatrix lhs =
        represent_crossed(l, lg) * represent_crossed(l, pa) * represent_crossed(l, lgi);
    CHECK(interior_norm(l, lhs - represent_crossed(l, pag), std::abs(g)) < 1e-10);
  }
}

TEST_CASE("lifted unitaries commute with the lifted Dirac operator") {
  std::mt19937_64 rng(4);
  auto ub = uhf_base();
  const LiftedTriple trivial = build_lifted(ub, TrivialAction{}, 4);
  const ComplexMatrix id =
      lifted_unitary(trivial, Cocycle{}, AutomorphismSpec{UhfAutomorphism{}}, SiteMap::kIdentity);
  CHECK((id - ComplexMatrix::Identity(trivial.half_dim(), trivial.half_dim())).cwiseAbs().maxCoeff() <
        1e-12);
  for (const Complex chi : kCharacters) {
    const AutomorphismSpec beta = local_unitaries(rng);
    const ComplexMatrix u = lifted_unitary(trivial, Cocycle{chi}, beta, SiteMap::kIdentity);
    CHECK((u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK(lift_commutation_check(trivial, u).passes);
  }

  auto cb = cantor_base(3);
  const LiftedTriple odo = build_lifted(cb, OdometerAction{}, 4);
  const AutomorphismSpec odo2 =
      compose(cb->algebra(), odometer_portrait(3), odometer_portrait(3));
  for (const Complex chi : kCharacters) {
    const ComplexMatrix u = lifted_unitary(odo, Cocycle{chi}, odo2, SiteMap::kIdentity);
    const auto r = lift_commutation_check(odo, u);
    CHECK(r.passes);
    CHECK(r.residual < 1e-10);
  }
}

TEST_CASE("negative controls for the lift") {
  auto ub = uhf_base();
  const LiftedTriple trivial = build_lifted(ub, TrivialAction{}, 4);
  const ComplexMatrix neg =
      lifted_unitary(trivial, Cocycle{}, AutomorphismSpec{UhfAutomorphism{}}, SiteMap::kNegation);
  const auto rn = lift_commutation_check(trivial, neg);
  CHECK_FALSE(rn.passes);
  CHECK(rn.residual >= 2.0);

  UhfAutomorphism sw;
  sw.permutation = {1, 0};
  CHECK_THROWS_AS(lifted_unitary(trivial, Cocycle{}, AutomorphismSpec{sw}, SiteMap::kIdentity), Error);
  const ComplexMatrix us =
      lifted_unitary(trivial, Cocycle{}, AutomorphismSpec{sw}, SiteMap::kIdentity, false);
  CHECK(lift_commutation_check(trivial, us).residual > 0.1);

  auto cb = cantor_base(3);
  const LiftedTriple odo = build_lifted(cb, OdometerAction{}, 4);
  // Negation needs β∘α_1 = α_{−1}∘β; the identity fails, the complement works.
  CHECK_THROWS_AS(lifted_unitary(odo, Cocycle{}, AutomorphismSpec{TreePortrait{std::vector<int>(7, 0)}},
                                 SiteMap::kNegation),
                  Error);
  const AutomorphismSpec complement = TreePortrait{std::vector<int>(7, 1)};
  const ComplexMatrix un = lifted_unitary(odo, Cocycle{}, complement, SiteMap::kNegation);
  CHECK(lift_commutation_check(odo, un).residual > 0.1);
}

TEST_CASE("covariance of the lifted unitary") {
  std::mt19937_64 rng(5);
  auto ub = uhf_base();
  const LiftedTriple trivial = build_lifted(ub, TrivialAction{}, 4);
  CrossedElement a0;
  a0.terms.emplace(0, random_element(ub->algebra_ptr(), rng));
  CHECK(covariance_check(trivial, Cocycle{}, UhfAutomorphism{}, SiteMap::kIdentity, a0) == 0.0);
  for (const Complex chi : kCharacters) {
    const auto x = random_crossed(ub->algebra_ptr(), 2, rng);
    CHECK(covariance_check(trivial, Cocycle{chi}, local_unitaries(rng), SiteMap::kIdentity, x) <
          1e-10);
  }

  auto cb = cantor_base(3);
  const LiftedTriple odo = build_lifted(cb, OdometerAction{}, 4);
  CrossedElement a1;
  a1.terms.emplace(1, random_element(cb->algebra_ptr(), rng));
  CHECK(covariance_check(odo, Cocycle{{0.0, 1.0}}, TreePortrait{std::vector<int>(7, 0)},
                         SiteMap::kIdentity, a1) < 1e-10);
  const auto x = random_crossed(cb->algebra_ptr(), 2, rng);
  for (const Complex chi : kCharacters) {
    CHECK(covariance_check(odo, Cocycle{chi}, odometer_portrait(3), SiteMap::kIdentity, x) < 1e-10);
    // Covariance holds for the complement with negation even though D_l is not preserved.
    CHECK(covariance_check(odo, Cocycle{chi}, TreePortrait{std::vector<int>(7, 1)},
                           SiteMap::kNegation, x) < 1e-10);
  }
}

TEST_CASE("lifted unitaries compose like their parameters") {
  std::mt19937_64 rng(6);
  auto ub = uhf_base();
  const LiftedTriple l = build_lifted(ub, TrivialAction{}, 3);
  const AutomorphismSpec b1 = local_unitaries(rng), b2 = local_unitaries(rng);
  const Cocycle c1{kCharacters[1]}, c2{kCharacters[2]};
  const ComplexMatrix prod = lifted_unitary(l, c1, b1, SiteMap::kIdentity) *
                             lifted_unitary(l, c2, b2, SiteMap::kIdentity);
  const ComplexMatrix joint = lifted_unitary(l, Cocycle{c1.chi * c2.chi},
                                             compose(ub->algebra(), b1, b2), SiteMap::kIdentity);
  CHECK(interior_norm(l, prod - joint, 0) < 1e-10);
}

TEST_CASE("commutator norms stabilize with the window") {
  std::mt19937_64 rng(7);
  auto ub = uhf_base();
  CrossedElement a0;
  a0.terms.emplace(0, random_element(ub->algebra_ptr(), rng));
  const auto rows = crossed_commutator_stability(ub, TrivialAction{}, a0);
  REQUIRE(rows.size() >= 4);
  const double direct = ub->commutator_norm(a0.terms.at(0));
  for (const auto& r : rows) CHECK(std::abs(r.norm - direct) < 1e-9);

  CrossedElement shift;
  shift.terms.emplace(1, AlgebraElement::identity(ub->algebra_ptr()));
  for (const auto& r : crossed_commutator_stability(ub, TrivialAction{}, shift)) {
    CHECK(std::abs(r.norm - 1.0) < 1e-12);
  }
  CrossedElement zero;
  zero.terms.emplace(0, AlgebraElement::zero(ub->algebra_ptr(), 2));
  for (const auto& r : crossed_commutator_stability(ub, TrivialAction{}, zero)) CHECK(r.norm == 0.0);

  // Single-term elements are weighted shifts: the norm is a maximum over
  // sites, and the odometer acts isometrically, so it does not move.
  auto cb = cantor_base(3);
  for (int g = -1; g <= 1; ++g) {
    CrossedElement single;
    single.terms.emplace(g, random_element(cb->algebra_ptr(), rng));
    const auto rows_g = crossed_commutator_stability(cb, OdometerAction{}, single);
    for (std::size_t i = 1; i < rows_g.size(); ++i) {
      CHECK(std::abs(rows_g[i].norm - rows_g[0].norm) <= 1e-8);
    }
  }
  // Several terms give a banded operator along the group; its finite
  // sections increase towards the infinite-window norm.
  const auto x = random_crossed(cb->algebra_ptr(), 1, rng);
  const auto odo_rows = crossed_commutator_stability(cb, OdometerAction{}, x);
  for (std::size_t i = 1; i < odo_rows.size(); ++i) {
    CHECK(odo_rows[i].norm >= odo_rows[i - 1].norm - 1e-12);
    if (i >= 2) {
      CHECK(odo_rows[i].norm - odo_rows[i - 1].norm <=
            odo_rows[i - 1].norm - odo_rows[i - 2].norm + 1e-12);
    }
  }
}

TEST_CASE("action validation") {
  CHECK_THROWS_AS(build_lifted(uhf_base(), OdometerAction{}, 3), Error);
  UhfAutomorphism sw;
  sw.permutation = {1, 0};
  CHECK_THROWS_AS(build_lifted(uhf_base(), IsoPowerAction{sw}, 3), Error);
  CHECK_THROWS_AS(build_lifted(uhf_base(), TrivialAction{}, 1), Error);
  std::mt19937_64 rng(8);
  const LiftedTriple l = build_lifted(uhf_base(), IsoPowerAction{local_unitaries(rng)}, 3);
  const ComplexMatrix u =
      lifted_unitary(l, Cocycle{}, AutomorphismSpec{UhfAutomorphism{}}, SiteMap::kIdentity);
  CHECK(lift_commutation_check(l, u).passes);
}
