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

#include "nclab/isometries.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

bool is_unitary(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <=
         Tolerances::kStructural;
}

bool is_permutation(const std::vector<int>& p, int n) {
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<int> s = p;
  std::sort(s.begin(), s.end());
  for (int i = 0; i < n; ++i) {
    if (s[i] != i) return false;
  }
  return true;
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

bool uhf_variant(const AutomorphismSpec& a) {
  return std::holds_alternative<UhfAutomorphism>(a) || std::holds_alternative<FlipM2>(a);
}

}  // namespace

std::string automorphism_name(const AutomorphismSpec& a) {
  struct Visitor {
    std::string operator()(const UhfAutomorphism&) const { return "uhf"; }
    std::string operator()(const TreePortrait&) const { return "tree-portrait"; }
    std::string operator()(const LeafPermutation&) const { return "leaf-permutation"; }
    std::string operator()(const FlipM2&) const { return "flip"; }
  };
  return std::visit(Visitor{}, a);
}

ComplexMatrix uhf_implementer(const AfAlgebra& algebra, const AutomorphismSpec& a) {
  if (!algebra.is_uhf()) {
    throw Error(ErrorKind::kInvalidInput, automorphism_name(a) + " needs a UHF algebra");
  }
  const int n = algebra.depth();
  const int k = algebra.local_dim();
  const auto dim = static_cast<Eigen::Index>(ipow(k, n));
  if (std::holds_alternative<FlipM2>(a)) {
    if (k != 2) throw Error(ErrorKind::kInvalidInput, "the flip acts on UHF(2)");
    return kron(pauli(1), ComplexMatrix::Identity(dim / 2, dim / 2));
  }
  const auto* u = std::get_if<UhfAutomorphism>(&a);
  if (u == nullptr) {
    throw Error(ErrorKind::kInvalidInput, automorphism_name(a) + " is not a UHF automorphism");
  }
  std::vector<int> perm = u->permutation;
  if (perm.empty()) {
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), 0);
  }
  if (!is_permutation(perm, n)) {
    throw Error(ErrorKind::kInvalidInput, "slot permutation must be a permutation of 0..N-1");
  }
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  std::vector<int> digits(n), moved(n);
  for (Eigen::Index i = 0; i < dim; ++i) {
    Eigen::Index rest = i;
    for (int s = n - 1; s >= 0; --s) {
      digits[s] = static_cast<int>(rest % k);
      rest /= k;
    }
    for (int s = 0; s < n; ++s) moved[perm[s]] = digits[s];
    Eigen::Index j = 0;
    for (int s = 0; s < n; ++s) j = j * k + moved[s];
    p(j, i) = 1.0;
  }
  ComplexMatrix w = p;
  if (!u->locals.empty()) {
    if (static_cast<int>(u->locals.size()) != n) {
      throw Error(ErrorKind::kInvalidInput, "need one local unitary per slot");
    }
    ComplexMatrix l = ComplexMatrix::Identity(1, 1);
    for (const auto& m : u->locals) {
      if (m.rows() != k || !is_unitary(m)) {
        throw Error(ErrorKind::kInvalidInput, "local factor is not a k x k unitary");
      }
      l = kron(l, m);
    }
    w = l * w;
  }
  for (const auto& b : u->blocks) {
    if (b.first < 0 || b.count < 1 || b.first + b.count > n) {
      throw Error(ErrorKind::kInvalidInput, "block unitary outside the slots");
    }
    const auto bd = static_cast<Eigen::Index>(ipow(k, b.count));
    if (b.unitary.rows() != bd || !is_unitary(b.unitary)) {
      throw Error(ErrorKind::kInvalidInput, "block factor is not a unitary of size k^count");
    }
    const auto left = static_cast<Eigen::Index>(ipow(k, b.first));
    const auto right = static_cast<Eigen::Index>(ipow(k, n - b.first - b.count));
    w = kron(kron(ComplexMatrix::Identity(left, left), b.unitary),
             ComplexMatrix::Identity(right, right)) *
        w;
  }
  return w;
}

std::vector<int> portrait_leaf_map(int depth, const TreePortrait& g) {
  const int leaves = 1 << depth;
  if (static_cast<int>(g.bits.size()) != leaves - 1) {
    throw Error(ErrorKind::kInvalidInput,
                "tree portrait needs 2^N - 1 = " + std::to_string(leaves - 1) + " bits");
  }
  for (int b : g.bits) {
    if (b != 0 && b != 1) throw Error(ErrorKind::kInvalidInput, "portrait bits must be 0/1");
  }
  std::vector<int> image(leaves);
  for (int x = 0; x < leaves; ++x) {
    int y = 0;
    for (int i = 0; i < depth; ++i) {
      const int prefix = x >> (depth - i);
      const int bit = (x >> (depth - 1 - i)) & 1;
      y = (y << 1) | (bit ^ g.bits[(1 << i) - 1 + prefix]);
    }
    image[x] = y;
  }
  return image;
}

std::optional<TreePortrait> portrait_of(int depth, const std::vector<int>& image) {
  const int leaves = 1 << depth;
  if (!is_permutation(image, leaves)) return std::nullopt;
  TreePortrait g;
  g.bits.assign(leaves - 1, -1);
  for (int x = 0; x < leaves; ++x) {
    for (int i = 0; i < depth; ++i) {
      const int node = (1 << i) - 1 + (x >> (depth - i));
      const int b = ((x ^ image[x]) >> (depth - 1 - i)) & 1;
      if (g.bits[node] == -1) {
        g.bits[node] = b;
      } else if (g.bits[node] != b) {
        return std::nullopt;
      }
    }
  }
  if (portrait_leaf_map(depth, g) != image) return std::nullopt;
  return g;
}

std::vector<int> leaf_map(const AfAlgebra& algebra, const AutomorphismSpec& a) {
  if (!algebra.is_cantor()) {
    throw Error(ErrorKind::kInvalidInput, automorphism_name(a) + " needs the Cantor algebra");
  }
  const int n = algebra.depth();
  if (const auto* g = std::get_if<TreePortrait>(&a)) return portrait_leaf_map(n, *g);
  if (const auto* l = std::get_if<LeafPermutation>(&a)) {
    if (!is_permutation(l->image, 1 << n)) {
      throw Error(ErrorKind::kInvalidInput, "leaf map is not a permutation of the leaves");
    }
    return l->image;
  }
  throw Error(ErrorKind::kInvalidInput, automorphism_name(a) + " does not act on leaves");
}

double multiplicativity_defect(const AfAlgebra& algebra, const ComplexMatrix& alpha,
                               int samples, std::uint64_t seed) {
  const int n = algebra.depth();
  const auto d = static_cast<int>(algebra.dim(n));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, d - 1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int i = pick(rng), j = pick(rng);
    ComplexVector ei = ComplexVector::Zero(d), ej = ComplexVector::Zero(d);
    ei(i) = 1.0;
    ej(j) = 1.0;
    const ComplexVector lhs = alpha * algebra.multiply(ei, ej, n);
    const ComplexVector rhs = algebra.multiply(alpha.col(i), alpha.col(j), n);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

ComplexMatrix automorphism_matrix(const AfAlgebra& algebra, const AutomorphismSpec& a) {
  const int n = algebra.depth();
  const auto d = static_cast<Eigen::Index>(algebra.dim(n));
  ComplexMatrix out(d, d);
  if (uhf_variant(a)) {
    const ComplexMatrix w = uhf_implementer(algebra, a);
    const ComplexMatrix wa = w.adjoint();
    for (Eigen::Index i = 0; i < d; ++i) {
      ComplexVector e = ComplexVector::Zero(d);
      e(i) = 1.0;
      out.col(i) = algebra.decompose(w * algebra.materialize(e, n) * wa, n);
    }
  } else {
    const std::vector<int> p = leaf_map(algebra, a);
    const RealMatrix& h = algebra.haar_values();
    const int leaves = 1 << n;
    for (Eigen::Index i = 0; i < d; ++i) {
      ComplexVector moved(leaves);
      for (int x = 0; x < leaves; ++x) moved(p[x]) = h(x, i);
      out.col(i) = algebra.from_cell_values(moved, n);
    }
    // Leaf permutations are automorphisms of C(X) by construction.
    return out;
  }
  const double defect = multiplicativity_defect(algebra, out, 32, 1234);
  if (defect > Tolerances::kStructural) {
    throw Error(ErrorKind::kInvalidInput,
                "specification is not multiplicative (defect " + std::to_string(defect) + ")");
  }
  return out;
}

AlgebraElement apply_automorphism(const ComplexMatrix& alpha, const AlgebraElement& x) {
  const int n = x.algebra().depth();
  return AlgebraElement(x.algebra_ptr(), n, alpha * x.embed(n).coeffs());
}

double state_defect(const AfAlgebra& algebra, const StateSpec& state,
                    const ComplexMatrix& alpha) {
  const ComplexVector m = state_moments(algebra, state, algebra.depth());
  return (alpha.transpose() * m - m).cwiseAbs().maxCoeff();
}

ComplexMatrix implementing_unitary(const GnsSpace& gns, const ComplexMatrix& alpha) {
  const double defect = state_defect(gns.algebra(), gns.state(), alpha);
  if (defect > Tolerances::kStructural) {
    throw Error(ErrorKind::kNoUnitary,
                "automorphism moves the reference state (defect " + std::to_string(defect) +
                    ")");
  }
  ComplexMatrix u = gns.identity_transform()
                        ? alpha
                        : ComplexMatrix(gns.inverse_transform() * alpha * gns.transform());
  if (!is_unitary(u)) {
    throw Error(ErrorKind::kNoUnitary, "induced map on the GNS space is not unitary");
  }
  return u;
}

ComplexMatrix implementing_unitary(const GnsSpace& gns, const AutomorphismSpec& a) {
  return implementing_unitary(gns, automorphism_matrix(gns.algebra(), a));
}

std::vector<bool> filtration_check(const AfAlgebra& algebra, const ComplexMatrix& alpha,
                                   const std::vector<int>& levels) {
  std::vector<bool> out;
  const auto d = static_cast<Eigen::Index>(algebra.dim(algebra.depth()));
  for (int level : levels) {
    const auto lo = static_cast<Eigen::Index>(algebra.dim(level));
    const double leak = lo < d ? operator_norm(alpha.block(lo, 0, d - lo, lo)) : 0.0;
    out.push_back(leak <= Tolerances::kStructural);
  }
  return out;
}

std::vector<bool> filtration_check(const AfAlgebra& algebra, const AutomorphismSpec& a,
                                   const std::vector<int>& levels) {
  return filtration_check(algebra, automorphism_matrix(algebra, a), levels);
}

IsoVerdict iso_check(const TruncatedTriple& triple, const ComplexMatrix& alpha) {
  const AfAlgebra& alg = triple.algebra();
  if (triple.level() != alg.depth()) {
    throw Error(ErrorKind::kInvalidInput, "iso_check needs the triple at full depth");
  }
  IsoVerdict v;
  v.state_preserved = state_defect(alg, triple.state(), alpha) <= Tolerances::kStructural;
  std::vector<int> levels(alg.depth());
  std::iota(levels.begin(), levels.end(), 1);
  v.filtration_levels_preserved = filtration_check(alg, alpha, levels);
  if (!v.state_preserved) return v;
  const ComplexMatrix u = implementing_unitary(triple.gns(), alpha);
  const double residual = operator_norm(triple.commutator_with(u));
  if (residual > Tolerances::kIsoResidual && residual < Tolerances::kIsoAmbiguity) {
    throw Error(ErrorKind::kAmbiguous,
                "commutator residual " + std::to_string(residual) + " is inside the guard band");
  }
  v.implementing_unitary = u;
  v.commutator_residual = residual;
  v.in_iso = residual <= Tolerances::kIsoResidual;
  return v;
}

IsoVerdict iso_check(const TruncatedTriple& triple, const AutomorphismSpec& a) {
  return iso_check(triple, automorphism_matrix(triple.algebra(), a));
}

std::vector<int> block_levels(const std::vector<double>& lambdas) {
  std::vector<int> out;
  const int n = static_cast<int>(lambdas.size()) - 1;
  for (int i = 1; i < n; ++i) {
    if (lambdas[i] != lambdas[i + 1]) out.push_back(i);
  }
  if (n >= 1) out.push_back(n);
  return out;
}

AutomorphismSpec compose(const AfAlgebra& algebra, const AutomorphismSpec& outer,
                         const AutomorphismSpec& inner) {
  if (uhf_variant(outer) && uhf_variant(inner)) {
    const ComplexMatrix w = uhf_implementer(algebra, outer) * uhf_implementer(algebra, inner);
    UhfAutomorphism u;
    u.blocks.push_back({0, algebra.depth(), w});
    return u;
  }
  const std::vector<int> po = leaf_map(algebra, outer);
  const std::vector<int> pi = leaf_map(algebra, inner);
  std::vector<int> image(pi.size());
  for (std::size_t x = 0; x < pi.size(); ++x) image[x] = po[pi[x]];
  if (std::holds_alternative<TreePortrait>(outer) && std::holds_alternative<TreePortrait>(inner)) {
    return *portrait_of(algebra.depth(), image);
  }
  return LeafPermutation{image};
}

AutomorphismSpec inverse(const AfAlgebra& algebra, const AutomorphismSpec& a) {
  if (uhf_variant(a)) {
    UhfAutomorphism u;
    u.blocks.push_back({0, algebra.depth(), uhf_implementer(algebra, a).adjoint()});
    return u;
  }
  const std::vector<int> p = leaf_map(algebra, a);
  std::vector<int> inv(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) inv[p[x]] = static_cast<int>(x);
  if (std::holds_alternative<TreePortrait>(a)) return *portrait_of(algebra.depth(), inv);
  return LeafPermutation{inv};
}

// ---------------------------------------------------------------------------
// Cantor enumeration

EnumerationReport enumerate_cantor_iso(const TruncatedTriple& triple, bool exhaustive_scan,
                                       const ProgressCallback& progress, std::uint64_t seed) {
  const AfAlgebra& alg = triple.algebra();
  if (!alg.is_cantor()) throw Error(ErrorKind::kInvalidInput, "enumeration needs a Cantor triple");
  const int n = alg.depth();
  if (n > 8) throw Error(ErrorKind::kUnsupported, "portrait enumeration supports depth <= 8");
  if (exhaustive_scan && n > 3) {
    throw Error(ErrorKind::kUnsupported, "exhaustive leaf scan is capped at depth 3");
  }
  const int nodes = (1 << n) - 1;
  EnumerationReport r;
  r.depth = n;
  r.log2_expected_order = nodes;

  std::vector<TreePortrait> portraits;
  if (n <= 4) {
    r.portraits_exhaustive = true;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nodes); ++mask) {
      TreePortrait g;
      g.bits.resize(nodes);
      for (int b = 0; b < nodes; ++b) g.bits[b] = static_cast<int>((mask >> b) & 1);
      portraits.push_back(std::move(g));
    }
  } else {
    portraits.push_back(TreePortrait{std::vector<int>(nodes, 0)});
    for (int b = 0; b < nodes; ++b) {
      TreePortrait g{std::vector<int>(nodes, 0)};
      g.bits[b] = 1;
      portraits.push_back(std::move(g));
    }
    std::mt19937_64 rng(seed);
    for (int s = 0; s < 64; ++s) {
      TreePortrait g{std::vector<int>(nodes)};
      for (int& b : g.bits) b = static_cast<int>(rng() & 1);
      portraits.push_back(std::move(g));
    }
  }
  const std::uint64_t total =
      portraits.size() + (exhaustive_scan ? [&] {
        std::uint64_t f = 1;
        for (int i = 2; i <= (1 << n); ++i) f *= static_cast<std::uint64_t>(i);
        return f;
      }()
                                          : 0);
  std::uint64_t done = 0;
  std::set<std::vector<int>> portrait_maps;
  for (const auto& g : portraits) {
    ++r.portraits_checked;
    if (iso_check(triple, AutomorphismSpec{g}).in_iso) ++r.portraits_in_iso;
    portrait_maps.insert(portrait_leaf_map(n, g));
    if (progress && (++done % 4096 == 0)) progress(done, total);
  }
  if (r.portraits_exhaustive) r.order = r.portraits_in_iso;

  if (exhaustive_scan) {
    std::vector<int> perm(1 << n);
    std::iota(perm.begin(), perm.end(), 0);
    std::set<std::vector<int>> found;
    do {
      ++r.permutations_scanned;
      if (iso_check(triple, AutomorphismSpec{LeafPermutation{perm}}).in_iso) found.insert(perm);
      if (progress && (++done % 4096 == 0)) progress(done, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.permutations_in_iso = found.size();
    r.scan_matches_portraits = r.portraits_exhaustive && found == portrait_maps;
    r.order = r.permutations_in_iso;
  }
  if (progress) progress(total, total);

  // Semidirect composition law: bits of g∘h at v are b_h(v) ⊕ b_g(h(v)).
  std::mt19937_64 rng(seed + 1);
  std::uniform_int_distribution<std::size_t> pick(0, portraits.size() - 1);
  bool law = true;
  for (int s = 0; s < 200 && law; ++s) {
    const TreePortrait& g = portraits[pick(rng)];
    const TreePortrait& h = portraits[pick(rng)];
    const std::vector<int> hm = portrait_leaf_map(n, h);
    TreePortrait gh{std::vector<int>(nodes)};
    for (int i = 0; i < n; ++i) {
      for (int p = 0; p < (1 << i); ++p) {
        const int leaf = p << (n - i);
        const int image_prefix = hm[leaf] >> (n - i);
        gh.bits[(1 << i) - 1 + p] =
            h.bits[(1 << i) - 1 + p] ^ g.bits[(1 << i) - 1 + image_prefix];
      }
    }
    const std::vector<int> gm = portrait_leaf_map(n, g);
    std::vector<int> composed(hm.size());
    for (std::size_t x = 0; x < hm.size(); ++x) composed[x] = gm[hm[x]];
    law = portrait_leaf_map(n, gh) == composed &&
          iso_check(triple, compose(alg, g, h)).in_iso;
  }
  r.composition_law_holds = law;
  return r;
}

// ---------------------------------------------------------------------------
// Switch violation

namespace {

void require_car_triple(const TruncatedTriple& t) {
  const AfAlgebra& alg = t.algebra();
  if (!alg.is_uhf() || alg.local_dim() != 2 || !std::holds_alternative<TraceState>(t.state())) {
    throw Error(ErrorKind::kPrecondition, "needs a UHF(2) triple with the trace");
  }
  if (!t.flags().pairwise_distinct) {
    throw Error(ErrorKind::kPrecondition, "needs pairwise-distinct eigenvalues");
  }
}

}  // namespace

SwitchReport switch_iso_violation(std::shared_ptr<const TruncatedTriple> triple, int k,
                                  const AlgebraElement& v, const SolverConfig& cfg) {
  require_car_triple(*triple);
  if (k < 0 || k + 1 > triple->level()) {
    throw Error(ErrorKind::kInvalidInput, "switch index needs 0 <= k <= level - 1");
  }
  const AlgebraElement v1 = v.restrict_to(1);
  validate_state(triple->algebra(), VectorState{v1});
  const ComplexVector m = state_moments(triple->algebra(), VectorState{v1}, 1);
  const double bloch = m.tail(3).norm();
  if (std::abs(bloch - 1.0) > 1e-9) {
    throw Error(ErrorKind::kPrecondition,
                "v must give a pure single-slot state (Bloch length " + std::to_string(bloch) + ")");
  }
  SwitchReport r;
  r.k = k;
  r.before = distance(reduce_search_level(make_problem(triple, TraceState{}, VectorState{v1})), cfg);
  r.after = distance(
      reduce_search_level(make_problem(triple, TraceState{}, VectorState{shift_embed(v1, k)})), cfg);
  const double ub = r.before.upper_bound.value_or(std::numeric_limits<double>::infinity());
  const double ua = r.after.upper_bound.value_or(std::numeric_limits<double>::infinity());
  r.gap = std::abs(ub - ua);
  r.certified_gap = std::max({r.before.lower_bound - ua, r.after.lower_bound - ub, 0.0});
  r.violation = r.certified_gap > 1e-6;
  return r;
}

std::optional<SwitchReport> first_switch_violation(std::shared_ptr<const TruncatedTriple> triple,
                                                   const AlgebraElement& v,
                                                   const SolverConfig& cfg) {
  for (int k = 1; k < triple->level(); ++k) {
    SwitchReport r = switch_iso_violation(triple, k, v, cfg);
    if (r.violation) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Flip demo

FlipReport flip_demo(double d1, double d2, int pairs, std::uint64_t seed) {
  if (!(std::abs(d1 - d2) > 0)) {
    throw Error(ErrorKind::kInvalidInput, "flip demo needs two distinct eigenvalues");
  }
  FlipReport r;
  r.d1 = d1;
  r.d2 = d2;
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = d1;
  d(1, 1) = d2;
  const ComplexMatrix u = pauli(1);
  const ComplexMatrix du = commutator(d, u);
  r.commutator_norm = operator_norm(du);
  r.commutator_frobenius = du.norm();
  r.flip_not_in_iso = r.commutator_norm > 0.1;

  std::mt19937_64 rng(seed);
  for (int s = 0; s < 100; ++s) {
    const ComplexMatrix a = random_complex(2, 2, rng);
    const ComplexMatrix res = commutator(d, u.adjoint() * a * u) + u.adjoint() * commutator(d, a) * u;
    r.identity_residual = std::max(r.identity_residual, operator_norm(res));
  }

  ConstraintForm form;
  for (int l = 1; l <= 3; ++l) form.generators.push_back(commutator(d, pauli(l)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_bloch = [&](double z) {
    const double rad = std::sqrt(1.0 - z * z) * std::sqrt(unit(rng));
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    RealVector b(3);
    b << rad * std::cos(phase), rad * std::sin(phase), z;
    return b;
  };
  // φ∘ad U has Bloch vector (r_1, −r_2, −r_3).
  auto flipped = [](const RealVector& b) {
    RealVector f = b;
    f(1) = -f(1);
    f(2) = -f(2);
    return f;
  };
  for (int s = 0; s < pairs; ++s) {
    const double z = 1.8 * unit(rng) - 0.9;
    const RealVector b1 = random_bloch(z), b2 = random_bloch(z);
    form.objective = b1 - b2;
    const double before = brute_force_support(form);
    form.objective = flipped(b1) - flipped(b2);
    const double after = brute_force_support(form);
    const double closed = (b1 - b2).head(2).norm() / std::abs(d1 - d2);
    r.max_deviation = std::max(r.max_deviation, std::abs(after - before));
    r.max_closed_form_error = std::max(r.max_closed_form_error, std::abs(before - closed));
    ++r.pairs;
  }
  for (int s = 0; s < 20; ++s) {
    const RealVector b1 = random_bloch(0.5 * unit(rng)), b2 = random_bloch(-0.5 * unit(rng) - 0.1);
    int unbounded = 0;
    for (const RealVector& c : {RealVector(b1 - b2), RealVector(flipped(b1) - flipped(b2))}) {
      form.objective = c;
      try {
        brute_force_support(form);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kUnbounded) ++unbounded;
      }
    }
    ++r.unbounded_pairs;
    if (unbounded != 2) r.unbounded_preserved = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Shift inequality

ShiftReport shift_inequality_check(const TruncatedTriple& triple, const AlgebraElement& x,
                                   int n, double c) {
  if (!triple.algebra().is_uhf()) {
    throw Error(ErrorKind::kInvalidInput, "shift inequality is stated on UHF algebras");
  }
  if (!(c > 0)) throw Error(ErrorKind::kInvalidInput, "constant c(n) must be positive");
  if (n < 1 || n + 1 > triple.level()) {
    throw Error(ErrorKind::kInvalidInput, "needs 1 <= n and triple level >= n+1");
  }
  if (x.level() > 1) throw Error(ErrorKind::kInvalidInput, "x must lie in A_1");
  const double ln = triple.lambda(n), ln1 = triple.lambda(n + 1);
  if ((c + 1.0) * ln > ln1 * (1.0 + 1e-12)) {
    throw Error(ErrorKind::kPrecondition,
                "eigenvalues violate (c+1) lambda_n <= lambda_{n+1} at n = " + std::to_string(n));
  }
  ShiftReport r;
  r.lhs = triple.commutator_norm(x);
  r.rhs = triple.commutator_norm(shift_embed(x, n)) * triple.lambda(1) / (c * ln);
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

ShiftReport shift_special_case(const TruncatedTriple& triple, const AlgebraElement& x) {
  if (triple.level() < 2) throw Error(ErrorKind::kInvalidInput, "needs triple level >= 2");
  if (x.level() > 1) throw Error(ErrorKind::kInvalidInput, "x must lie in A_1");
  const double l1 = triple.lambda(1), l2 = triple.lambda(2);
  if (!(2.0 * l1 < l2)) throw Error(ErrorKind::kPrecondition, "needs 2 lambda_1 < lambda_2");
  ShiftReport r;
  r.lhs = (l2 - l1) / l1 * triple.commutator_norm(x);
  r.rhs = triple.commutator_norm(shift_embed(x, 1));
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

// ---------------------------------------------------------------------------
// m-invariance

namespace {

int first_difference(int x, int y, int depth) {
  for (int i = 0; i < depth; ++i) {
    if (((x >> (depth - 1 - i)) & 1) != ((y >> (depth - 1 - i)) & 1)) return i;
  }
  return depth;
}

std::vector<int> bits_of(int x, int depth) {
  std::vector<int> b(depth);
  for (int i = 0; i < depth; ++i) b[i] = (x >> (depth - 1 - i)) & 1;
  return b;
}

}  // namespace

MClassReport m_invariance_experiment(double gamma, int depth, const SolverConfig& cfg,
                                     std::uint64_t seed) {
  const double bound = (3.0 - std::sqrt(5.0)) / 2.0;
  if (!(gamma > 0.0 && gamma < bound)) {
    throw Error(ErrorKind::kPrecondition, "gamma must lie in (0, (3 - sqrt 5)/2)");
  }
  if (depth < 1 || depth > 4) throw Error(ErrorKind::kPrecondition, "depth must be 1..4");
  auto triple = std::make_shared<const TruncatedTriple>(
      build_triple(FiltrationSpec::cantor(depth), UniformMeasure{}, DiracSpec::geometric(gamma)));
  MClassReport r;
  r.gamma = gamma;
  r.depth = depth;
  const int leaves = 1 << depth;
  std::vector<std::vector<double>> table(leaves, std::vector<double>(leaves, 0.0));
  std::vector<std::vector<double>> classes(depth);
  for (int x = 0; x < leaves; ++x) {
    for (int y = x + 1; y < leaves; ++y) {
      const auto p = make_problem(triple, CharacterState{bits_of(x, depth)},
                                  CharacterState{bits_of(y, depth)});
      const double d = distance(p, cfg).lower_bound;
      table[x][y] = table[y][x] = d;
      classes[first_difference(x, y, depth)].push_back(d);
      ++r.pairs;
    }
  }
  std::vector<std::pair<double, double>> ranges;
  for (const auto& c : classes) {
    r.class_sizes.push_back(static_cast<int>(c.size()));
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    r.class_values.push_back(std::accumulate(c.begin(), c.end(), 0.0) / c.size());
    r.max_spread = std::max(r.max_spread, *hi - *lo);
    ranges.emplace_back(*lo, *hi);
  }
  std::sort(ranges.begin(), ranges.end());
  r.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    r.min_gap = std::min(r.min_gap, ranges[i].first - ranges[i - 1].second);
  }

  const int nodes = leaves - 1;
  bool preserve = true;
  std::mt19937_64 rng(seed);
  const std::uint64_t count = std::uint64_t{1} << nodes;
  for (std::uint64_t s = 0; s < std::min<std::uint64_t>(count, 512) && preserve; ++s) {
    TreePortrait g{std::vector<int>(nodes)};
    const std::uint64_t mask = count <= 512 ? s : rng();
    for (int b = 0; b < nodes; ++b) g.bits[b] = static_cast<int>((mask >> b) & 1);
    const auto img = portrait_leaf_map(depth, g);
    for (int x = 0; x < leaves && preserve; ++x) {
      for (int y = x + 1; y < leaves; ++y) {
        if (first_difference(img[x], img[y], depth) != first_difference(x, y, depth)) {
          preserve = false;
          break;
        }
      }
    }
  }
  r.portraits_preserve_m = preserve;

  // Transposition across the root: breaks the first partition level.
  std::vector<int> perm(leaves);
  std::iota(perm.begin(), perm.end(), 0);
  if (depth >= 2) std::swap(perm[1], perm[leaves / 2]);
  bool changes = false;
  for (int x = 0; x < leaves; ++x) {
    for (int y = x + 1; y < leaves; ++y) {
      if (first_difference(perm[x], perm[y], depth) != first_difference(x, y, depth)) changes = true;
      r.violator_distance_change =
          std::max(r.violator_distance_change, std::abs(table[perm[x]][perm[y]] - table[x][y]));
    }
  }
  r.violator_changes_m = changes;
  r.violator_in_iso = iso_check(*triple, AutomorphismSpec{LeafPermutation{perm}}).in_iso;
  return r;
}

}  // namespace nclab
