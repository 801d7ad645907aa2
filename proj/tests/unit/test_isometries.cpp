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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nclab/errors.hpp"
#include "nclab/isometries.hpp"

using namespace nclab;

namespace {

TruncatedTriple uhf_triple(int depth, std::vector<double> lambdas, StateSpec state = TraceState{}) {
  return build_triple(FiltrationSpec::uhf(2, depth), std::move(state),
                      DiracSpec::explicit_values(std::move(lambdas)));
}

TruncatedTriple cantor_triple(int depth, double gamma = 1.0 / 3) {
  return build_triple(FiltrationSpec::cantor(depth), UniformMeasure{},
                      DiracSpec::geometric(gamma));
}

UhfAutomorphism slot_switch(int depth, int a, int b) {
  UhfAutomorphism u;
  u.permutation.resize(depth);
  std::iota(u.permutation.begin(), u.permutation.end(), 0);
  std::swap(u.permutation[a], u.permutation[b]);
  return u;
}

UhfAutomorphism local_unitaries(int depth, std::mt19937_64& rng) {
  UhfAutomorphism u;
  for (int s = 0; s < depth; ++s) u.locals.push_back(random_unitary(2, rng));
  return u;
}

bool all_true(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

// Span test independent of the grade ordering: the image of the level-i
// matrix units must stay inside the span of the level-i canonical basis.
bool level_preserved_bruteforce(const AfAlgebra& alg, const ComplexMatrix& alpha, int level) {
  const auto lo = static_cast<Eigen::Index>(alg.dim(level));
  const ComplexMatrix images = alpha.leftCols(lo);
  ComplexMatrix basis = ComplexMatrix::Zero(alpha.rows(), lo);
  basis.topRows(lo) = ComplexMatrix::Identity(lo, lo);
  ComplexMatrix both(alpha.rows(), 2 * lo);
  both << basis, images;
  Eigen::JacobiSVD<ComplexMatrix> svd(both);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-9) ++rank;
  }
  return rank == lo;
}

// Indices of canonical basis words supported on a single slot (identity
// elsewhere), including the identity itself.
std::vector<std::size_t> slot_words(const AfAlgebra& alg, int slot) {
  std::vector<std::size_t> out;
  const int id = alg.identity_label();
  for (std::size_t i = 0; i < alg.dim(alg.depth()); ++i) {
    const auto& w = alg.basis_index(i).word;
    bool ok = true;
    for (int s = 0; s < alg.depth(); ++s) {
      if (s != slot && w[s] != id) ok = false;
    }
    if (ok) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_CASE("identity automorphism is implemented by the identity") {
  auto t = uhf_triple(2, {1, 2});
  const ComplexMatrix u = implementing_unitary(t.gns(), AutomorphismSpec{UhfAutomorphism{}});
  CHECK((u - ComplexMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
  const auto v = iso_check(t, AutomorphismSpec{UhfAutomorphism{}});
  CHECK(v.in_iso);
  CHECK(all_true(v.filtration_levels_preserved));
}

TEST_CASE("local unitaries under the trace are implemented and fix the cyclic vector") {
  std::mt19937_64 rng(1);
  auto t = uhf_triple(2, {1, 2});
  const AutomorphismSpec a = local_unitaries(2, rng);
  const ComplexMatrix u = implementing_unitary(t.gns(), a);
  CHECK((u.adjoint() * u - ComplexMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(u(0, 0) - 1.0) < 1e-10);
  CHECK(u.col(0).tail(15).norm() < 1e-10);
  // U π(e_i) U* = π(α(e_i)).
  const ComplexMatrix alpha = automorphism_matrix(t.algebra(), a);
  for (std::size_t i = 0; i < 16; ++i) {
    const auto e = AlgebraElement::basis_element(t.algebra_ptr(), i);
    const ComplexMatrix lhs = u * t.represent(e) * u.adjoint();
    const ComplexMatrix rhs = t.represent(apply_automorphism(alpha, e));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
  const auto v = iso_check(t, a);
  CHECK(v.in_iso);
  CHECK(*v.commutator_residual < 1e-9);
}

TEST_CASE("three local unitaries lie in Iso") {
  std::mt19937_64 rng(2);
  auto t = uhf_triple(3, {1, 2, 4});
  CHECK(iso_check(t, AutomorphismSpec{local_unitaries(3, rng)}).in_iso);
}

TEST_CASE("automorphism that moves a product state has no implementing unitary") {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 0.8;
  rho(1, 1) = 0.2;
  auto t = uhf_triple(2, {1, 2}, ProductState{{rho, rho}});
  UhfAutomorphism flip;
  flip.locals = {pauli(1), pauli(4)};
  CHECK_THROWS_AS(implementing_unitary(t.gns(), AutomorphismSpec{flip}), Error);
  try {
    implementing_unitary(t.gns(), AutomorphismSpec{flip});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNoUnitary);
  }
  const auto v = iso_check(t, AutomorphismSpec{flip});
  CHECK_FALSE(v.state_preserved);
  CHECK_FALSE(v.in_iso);
  // Diagonal phases commute with ρ and stay implementable.
  ComplexMatrix phase = ComplexMatrix::Identity(2, 2);
  phase(1, 1) = std::polar(1.0, 0.7);
  UhfAutomorphism keep;
  keep.locals = {phase, phase};
  CHECK(iso_check(t, AutomorphismSpec{keep}).in_iso);
}

TEST_CASE("slot switch with distinct eigenvalues is not in Iso") {
  auto t = uhf_triple(3, {1, 2, 4});
  const auto v = iso_check(t, AutomorphismSpec{slot_switch(3, 0, 1)});
  CHECK(v.state_preserved);
  CHECK_FALSE(v.in_iso);
  REQUIRE(v.filtration_levels_preserved.size() == 3);
  CHECK_FALSE(v.filtration_levels_preserved[0]);
  CHECK(v.filtration_levels_preserved[1]);
  CHECK(v.filtration_levels_preserved[2]);
}

TEST_CASE("tied eigenvalues absorb the switch inside a block") {
  auto t = uhf_triple(3, {1, 1, 2});
  CHECK(iso_check(t, AutomorphismSpec{slot_switch(3, 0, 1)}).in_iso);
  CHECK_FALSE(iso_check(t, AutomorphismSpec{slot_switch(3, 1, 2)}).in_iso);
  CHECK(block_levels(t.lambdas()) == std::vector<int>{2, 3});

  auto t2 = uhf_triple(3, {1, 2, 2});
  CHECK_FALSE(iso_check(t2, AutomorphismSpec{slot_switch(3, 0, 1)}).in_iso);
  CHECK(iso_check(t2, AutomorphismSpec{slot_switch(3, 1, 2)}).in_iso);
  CHECK(block_levels(t2.lambdas()) == std::vector<int>{1, 3});
}

TEST_CASE("block-level round trip for tied eigenvalues") {
  std::mt19937_64 rng(3);
  for (auto lam : {std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 2}}) {
    auto t = uhf_triple(3, lam);
    const auto levels = block_levels(t.lambdas());
    for (int s = 0; s < 12; ++s) {
      UhfAutomorphism u;
      std::vector<int> perm{0, 1, 2};
      std::shuffle(perm.begin(), perm.end(), rng);
      u.permutation = perm;
      if (s % 3 == 0) u.locals = local_unitaries(3, rng).locals;
      if (s % 4 == 1) u.blocks.push_back({lam[0] == lam[1] ? 0 : 1, 2, random_unitary(4, rng)});
      const ComplexMatrix alpha = automorphism_matrix(t.algebra(), AutomorphismSpec{u});
      const auto v = iso_check(t, alpha);
      const bool predicted = v.state_preserved && all_true(filtration_check(t.algebra(), alpha, levels));
      CHECK(v.in_iso == predicted);
    }
  }
}

TEST_CASE("round trip over random and adversarial automorphisms") {
  std::mt19937_64 rng(4);
  int checked = 0, in_iso = 0, misclassified = 0;
  auto t = uhf_triple(3, {1, 2, 4});
  for (int s = 0; s < 30; ++s) {
    UhfAutomorphism u;
    if (s % 3 != 0) {
      std::vector<int> perm{0, 1, 2};
      std::shuffle(perm.begin(), perm.end(), rng);
      u.permutation = perm;
    }
    if (s % 2 == 0) u.locals = local_unitaries(3, rng).locals;
    if (s % 5 == 4) u.blocks.push_back({s % 2, 2, random_unitary(4, rng)});
    const auto v = iso_check(t, AutomorphismSpec{u});
    const bool predicted = v.state_preserved && all_true(v.filtration_levels_preserved);
    misclassified += v.in_iso != predicted;
    in_iso += v.in_iso;
    ++checked;
  }
  auto c = cantor_triple(3);
  for (int s = 0; s < 25; ++s) {
    TreePortrait g{std::vector<int>(7)};
    for (int& b : g.bits) b = static_cast<int>(rng() & 1);
    const auto v = iso_check(c, AutomorphismSpec{g});
    CHECK(v.in_iso);
    misclassified += v.in_iso != (v.state_preserved && all_true(v.filtration_levels_preserved));
    ++checked;
  }
  for (int s = 0; s < 15; ++s) {
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto v = iso_check(c, AutomorphismSpec{LeafPermutation{perm}});
    misclassified += v.in_iso != (v.state_preserved && all_true(v.filtration_levels_preserved));
    CHECK(v.in_iso == portrait_of(3, perm).has_value());
    ++checked;
  }
  CHECK(checked >= 60);
  CHECK(in_iso > 0);
  CHECK(misclassified == 0);
}

TEST_CASE("filtration check agrees with an explicit span test") {
  std::mt19937_64 rng(5);
  auto c = cantor_triple(3);
  for (int s = 0; s < 10; ++s) {
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const ComplexMatrix alpha =
        automorphism_matrix(c.algebra(), AutomorphismSpec{LeafPermutation{perm}});
    const auto fast = filtration_check(c.algebra(), alpha, {1, 2, 3});
    for (int l = 1; l <= 3; ++l) {
      CHECK(fast[l - 1] == level_preserved_bruteforce(c.algebra(), alpha, l));
    }
  }
}

TEST_CASE("in-Iso UHF automorphisms preserve each slot algebra") {
  std::mt19937_64 rng(6);
  auto t = uhf_triple(3, {1, 2, 4});
  for (int s = 0; s < 5; ++s) {
    const AutomorphismSpec a = local_unitaries(3, rng);
    REQUIRE(iso_check(t, a).in_iso);
    const ComplexMatrix alpha = automorphism_matrix(t.algebra(), a);
    for (int slot = 0; slot < 3; ++slot) {
      const auto words = slot_words(t.algebra(), slot);
      for (std::size_t i : words) {
        double outside = 0.0;
        for (Eigen::Index r = 0; r < alpha.rows(); ++r) {
          if (std::find(words.begin(), words.end(), static_cast<std::size_t>(r)) == words.end()) {
            outside = std::max(outside, std::abs(alpha(r, i)));
          }
        }
        CHECK(outside < 1e-10);
      }
    }
  }
}

TEST_CASE("group closure under composition and inverse") {
  std::mt19937_64 rng(7);
  auto t = uhf_triple(2, {1, 2});
  const AutomorphismSpec a = local_unitaries(2, rng), b = local_unitaries(2, rng);
  CHECK(iso_check(t, compose(t.algebra(), a, b)).in_iso);
  CHECK(iso_check(t, inverse(t.algebra(), a)).in_iso);
  const ComplexMatrix ab = automorphism_matrix(t.algebra(), compose(t.algebra(), a, b));
  const ComplexMatrix prod =
      automorphism_matrix(t.algebra(), a) * automorphism_matrix(t.algebra(), b);
  CHECK((ab - prod).cwiseAbs().maxCoeff() < 1e-10);

  auto c = cantor_triple(3);
  for (int s = 0; s < 10; ++s) {
    TreePortrait g{std::vector<int>(7)}, h{std::vector<int>(7)};
    for (int& x : g.bits) x = static_cast<int>(rng() & 1);
    for (int& x : h.bits) x = static_cast<int>(rng() & 1);
    const auto gh = compose(c.algebra(), g, h);
    CHECK(std::holds_alternative<TreePortrait>(gh));
    CHECK(iso_check(c, gh).in_iso);
    const auto gi = inverse(c.algebra(), g);
    CHECK(iso_check(c, gi).in_iso);
    const auto id = leaf_map(c.algebra(), compose(c.algebra(), g, gi));
    std::vector<int> expect(8);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(id == expect);
  }
}

TEST_CASE("specification validation") {
  auto t = uhf_triple(2, {1, 2});
  UhfAutomorphism bad;
  bad.permutation = {0, 0};
  CHECK_THROWS_AS(automorphism_matrix(t.algebra(), AutomorphismSpec{bad}), Error);
  UhfAutomorphism notunitary;
  notunitary.locals = {ComplexMatrix::Identity(2, 2) * 2.0, pauli(4)};
  CHECK_THROWS_AS(automorphism_matrix(t.algebra(), AutomorphismSpec{notunitary}), Error);
  auto c = cantor_triple(2);
  CHECK_THROWS_AS(automorphism_matrix(c.algebra(), AutomorphismSpec{TreePortrait{{0, 1}}}), Error);
  CHECK_THROWS_AS(automorphism_matrix(c.algebra(), AutomorphismSpec{LeafPermutation{{0, 1, 1, 3}}}),
                  Error);
  CHECK_THROWS_AS(automorphism_matrix(c.algebra(), AutomorphismSpec{FlipM2{}}), Error);
  // The flip at depth 1 is ad σ_1 and is multiplicative.
  auto t1 = uhf_triple(1, {1});
  const ComplexMatrix f = automorphism_matrix(t1.algebra(), AutomorphismSpec{FlipM2{}});
  CHECK(multiplicativity_defect(t1.algebra(), f, 16, 1) < 1e-12);
}

TEST_CASE("tree portraits materialize to the matching leaf permutation") {
  std::mt19937_64 rng(8);
  auto c = cantor_triple(3);
  for (int s = 0; s < 10; ++s) {
    TreePortrait g{std::vector<int>(7)};
    for (int& b : g.bits) b = static_cast<int>(rng() & 1);
    const auto perm = portrait_leaf_map(3, g);
    const ComplexMatrix a = automorphism_matrix(c.algebra(), AutomorphismSpec{g});
    const ComplexMatrix b = automorphism_matrix(c.algebra(), AutomorphismSpec{LeafPermutation{perm}});
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
    const auto back = portrait_of(3, perm);
    REQUIRE(back.has_value());
    CHECK(back->bits == g.bits);
  }
  // Root bit flips the first coordinate.
  TreePortrait root{{1, 0, 0}};
  CHECK(portrait_leaf_map(2, root) == std::vector<int>{2, 3, 0, 1});
}

TEST_CASE("Cantor enumeration at depth 2 and 3") {
  auto c2 = cantor_triple(2);
  const auto r2 = enumerate_cantor_iso(c2, true);
  CHECK(r2.permutations_scanned == 24);
  CHECK(r2.permutations_in_iso == 8);
  CHECK(r2.order == 8);
  CHECK(r2.scan_matches_portraits);
  CHECK(r2.composition_law_holds);
  CHECK(r2.log2_expected_order == 3);

  auto c3 = cantor_triple(3);
  std::uint64_t last = 0;
  const auto r3 = enumerate_cantor_iso(c3, true, [&](std::uint64_t done, std::uint64_t) { last = done; });
  CHECK(r3.permutations_scanned == 40320);
  CHECK(r3.permutations_in_iso == 128);
  CHECK(r3.portraits_in_iso == 128);
  CHECK(r3.order == (std::uint64_t{1} << r3.log2_expected_order));
  CHECK(r3.scan_matches_portraits);
  CHECK(r3.composition_law_holds);
  CHECK(last > 0);

  auto c4 = cantor_triple(4);
  CHECK_THROWS_AS(enumerate_cantor_iso(c4, true), Error);
  const auto r4 = enumerate_cantor_iso(c4, false);
  CHECK(r4.portraits_exhaustive);
  CHECK(r4.order == 32768);
}

TEST_CASE("switch experiment certifies distance gaps") {
  auto t = std::make_shared<const TruncatedTriple>(uhf_triple(3, {1, 2, 4}));
  ComplexMatrix vm = ComplexMatrix::Zero(2, 2);
  vm(0, 1) = std::sqrt(2.0);
  const auto v = AlgebraElement::from_matrix(t->algebra_ptr(), vm);
  const auto r0 = switch_iso_violation(t, 0, v);
  CHECK(r0.gap == 0.0);
  CHECK_FALSE(r0.violation);
  const auto r1 = switch_iso_violation(t, 1, v);
  CHECK(std::abs(r1.gap - 0.5) < 1e-12);
  CHECK(r1.certified_gap > 0.5 - 1e-6);
  CHECK(r1.violation);
  const auto r2 = switch_iso_violation(t, 2, v);
  CHECK(std::abs(r2.gap - 0.75) < 1e-12);
  CHECK(r2.certified_gap > 0.75 - 1e-6);
  const auto first = first_switch_violation(t, v);
  REQUIRE(first.has_value());
  CHECK(first->k == 1);

  auto tied = std::make_shared<const TruncatedTriple>(uhf_triple(3, {1, 1, 4}));
  CHECK_THROWS_AS(switch_iso_violation(tied, 1, v), Error);
  // A mixed state is not a Bloch-sphere point.
  const auto half = AlgebraElement::identity(t->algebra_ptr(), 1);
  CHECK_THROWS_AS(switch_iso_violation(t, 1, half), Error);
}

TEST_CASE("flip demo on the two-point spectrum") {
  const auto r = flip_demo();
  CHECK(std::abs(r.commutator_norm - 1.0) < 1e-12);
  CHECK(std::abs(r.commutator_frobenius - std::sqrt(2.0)) < 1e-12);
  CHECK(r.flip_not_in_iso);
  CHECK(r.identity_residual < 1e-14);
  CHECK(r.pairs == 100);
  CHECK(r.max_deviation <= 1e-6);
  CHECK(r.max_closed_form_error <= 1e-6);
  CHECK(r.unbounded_preserved);
  CHECK_THROWS_AS(flip_demo(1.0, 1.0), Error);
}

TEST_CASE("shift inequality") {
  auto t = uhf_triple(3, {1, 3, 9});
  std::mt19937_64 rng(9);
  for (int n = 1; n <= 2; ++n) {
    for (int s = 0; s < 50; ++s) {
      ComplexVector c = random_complex(4, 1, rng).col(0);
      const AlgebraElement x(t.algebra_ptr(), 1, c);
      const auto r = shift_inequality_check(t, x, n, 2.0);
      CHECK(r.holds);
      CHECK(r.rhs - r.lhs >= -1e-9);
    }
  }
  const auto one = shift_inequality_check(t, AlgebraElement::identity(t.algebra_ptr(), 1), 1, 2.0);
  CHECK(one.lhs == 0.0);
  CHECK(one.rhs == 0.0);
  for (int s = 0; s < 50; ++s) {
    ComplexVector c = random_complex(4, 1, rng).col(0);
    CHECK(shift_special_case(t, AlgebraElement(t.algebra_ptr(), 1, c)).holds);
  }
  auto bad = uhf_triple(3, {1, 2, 3});
  CHECK_THROWS_AS(
      shift_inequality_check(bad, AlgebraElement::identity(bad.algebra_ptr(), 1), 1, 2.0), Error);
}

TEST_CASE("m-invariance on the Cantor set") {
  SolverConfig cfg;
  cfg.starts = 8;
  const auto r = m_invariance_experiment(1.0 / 3, 3, cfg);
  CHECK(r.pairs == 28);
  CHECK(r.class_sizes == std::vector<int>{16, 8, 4});
  CHECK(r.max_spread <= 2e-5);
  CHECK(r.min_gap >= 10 * r.max_spread);
  CHECK(r.min_gap > 0);
  CHECK(r.portraits_preserve_m);
  CHECK(r.violator_changes_m);
  CHECK_FALSE(r.violator_in_iso);
  CHECK_THROWS_AS(m_invariance_experiment(0.4, 3, cfg), Error);
}

TEST_CASE("Iso elements preserve distances") {
  std::mt19937_64 rng(10);
  auto t = std::make_shared<const TruncatedTriple>(uhf_triple(2, {1, 2}));
  SolverConfig cfg;
  cfg.starts = 6;
  for (int s = 0; s < 4; ++s) {
    const auto spec = local_unitaries(2, rng);
    const ComplexMatrix w = uhf_implementer(t->algebra(), AutomorphismSpec{spec});
    ComplexVector a = random_complex(4, 1, rng).col(0), b = random_complex(4, 1, rng).col(0);
    const AlgebraElement va(t->algebra_ptr(), 1, a / a.norm() * 1.0);
    const AlgebraElement vb(t->algebra_ptr(), 1, b / b.norm() * 1.0);
    // ω_v ∘ ad W = ω_{W* v}.
    const auto moved = [&](const AlgebraElement& v) {
      return AlgebraElement::from_matrix(t->algebra_ptr(), w.adjoint() * v.embed(2).to_matrix());
    };
    const auto p = reduce_search_level(make_problem(t, VectorState{va}, VectorState{vb}));
    const auto q =
        reduce_search_level(make_problem(t, VectorState{moved(va)}, VectorState{moved(vb)}));
    CHECK(std::abs(distance(p, cfg).lower_bound - distance(q, cfg).lower_bound) <= 2e-6);
  }
}
