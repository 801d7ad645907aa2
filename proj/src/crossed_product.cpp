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

#include "nclab/crossed_product.hpp"

#include <cmath>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

std::string action_name(const ActionSpec& a) {
  struct Visitor {
    std::string operator()(const TrivialAction&) const { return "trivial"; }
    std::string operator()(const OdometerAction&) const { return "odometer"; }
    std::string operator()(const IsoPowerAction&) const { return "iso-power"; }
  };
  return std::visit(Visitor{}, a);
}

Complex Cocycle::at(int g) const {
  Complex out{1.0, 0.0};
  const Complex step = g >= 0 ? chi : std::conj(chi);
  for (int i = 0; i < std::abs(g); ++i) out *= step;
  return out;
}

TreePortrait odometer_portrait(int depth) {
  TreePortrait g;
  g.bits.assign((1 << depth) - 1, 0);
  for (int i = 0; i < depth; ++i) g.bits[(1 << i) - 1 + (1 << i) - 1] = 1;
  return g;
}

namespace {

int apply_site(SiteMap s, int g) { return s == SiteMap::kNegation ? -g : g; }

double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

LiftedTriple::LiftedTriple(std::shared_ptr<const TruncatedTriple> base, ActionSpec action,
                           int radius)
    : base_(std::move(base)), action_(std::move(action)), window_{radius} {
  if (radius < 2) throw Error(ErrorKind::kInvalidInput, "window radius must be at least 2");
  const AfAlgebra& alg = base_->algebra();
  if (base_->level() != alg.depth()) {
    throw Error(ErrorKind::kInvalidInput, "lifted triples need the base at full depth");
  }
  const auto d = static_cast<Eigen::Index>(alg.dim(alg.depth()));
  ComplexMatrix forward = ComplexMatrix::Identity(d, d);
  ComplexMatrix backward = forward;
  if (std::holds_alternative<OdometerAction>(action_)) {
    if (!alg.is_cantor()) throw Error(ErrorKind::kInvalidInput, "the odometer acts on the Cantor set");
    const AutomorphismSpec odo = odometer_portrait(alg.depth());
    forward = automorphism_matrix(alg, odo);
    backward = automorphism_matrix(alg, inverse(alg, odo));
  } else if (const auto* p = std::get_if<IsoPowerAction>(&action_)) {
    if (!iso_check(*base_, p->generator).in_iso) {
      throw Error(ErrorKind::kInvalidInput, "action generator is not in Iso of the base triple");
    }
    forward = automorphism_matrix(alg, p->generator);
    backward = automorphism_matrix(alg, inverse(alg, p->generator));
  }
  if (state_defect(alg, base_->state(), forward) > Tolerances::kStructural) {
    throw Error(ErrorKind::kInvalidInput, "action does not preserve the reference state");
  }
  const int reach = 2 * radius;
  powers_.assign(2 * reach + 1, ComplexMatrix::Identity(d, d));
  for (int g = 1; g <= reach; ++g) {
    powers_[reach + g] = forward * powers_[reach + g - 1];
    powers_[reach - g] = backward * powers_[reach - g + 1];
  }

  const int sites = window_.sites();
  half_ = d * sites;
  upper_ = ComplexMatrix::Zero(half_, half_);
  const RealVector& lam = base_->dirac_diagonal();
  for (Eigen::Index xi = 0; xi < d; ++xi) {
    for (int g = -radius; g <= radius; ++g) {
      upper_(index(xi, g), index(xi, g)) = Complex(lam(xi), -static_cast<double>(g));
    }
  }
}

Eigen::Index LiftedTriple::index(Eigen::Index xi, int g) const {
  return xi * window_.sites() + (g + window_.radius);
}

const ComplexMatrix& LiftedTriple::action_matrix(int g) const {
  const int reach = 2 * window_.radius;
  if (g < -reach || g > reach) {
    throw Error(ErrorKind::kWindowTooSmall, "group element " + std::to_string(g) + " beyond 2L");
  }
  return powers_[reach + g];
}

AlgebraElement LiftedTriple::act(int g, const AlgebraElement& a) const {
  return apply_automorphism(action_matrix(g), a);
}

ComplexMatrix LiftedTriple::dirac() const {
  ComplexMatrix d = ComplexMatrix::Zero(dim(), dim());
  d.topRightCorner(half_, half_) = upper_;
  d.bottomLeftCorner(half_, half_) = upper_.adjoint();
  return d;
}

LiftedTriple build_lifted(std::shared_ptr<const TruncatedTriple> base, const ActionSpec& action,
                          int radius) {
  return LiftedTriple(std::move(base), action, radius);
}

int CrossedElement::radius() const {
  int r = 0;
  for (const auto& [g, a] : terms) r = std::max(r, std::abs(g));
  return r;
}

CrossedElement crossed_multiply(const LiftedTriple& lifted, const CrossedElement& x,
                                const CrossedElement& y) {
  // (aλ_g)(bλ_h) = a α_g(b) λ_{g+h}.
  CrossedElement out;
  const int n = lifted.base().algebra().depth();
  for (const auto& [g, a] : x.terms) {
    for (const auto& [h, b] : y.terms) {
      AlgebraElement term = multiply(a.embed(n), lifted.act(g, b));
      auto it = out.terms.find(g + h);
      if (it == out.terms.end()) {
        out.terms.emplace(g + h, std::move(term));
      } else {
        it->second = it->second + term;
      }
    }
  }
  return out;
}

CrossedElement crossed_adjoint(const LiftedTriple& lifted, const CrossedElement& x) {
  // (aλ_g)* = α_{−g}(a*) λ_{−g}.
  CrossedElement out;
  for (const auto& [g, a] : x.terms) out.terms.emplace(-g, lifted.act(-g, a.adjoint()));
  return out;
}

ComplexMatrix represent_crossed(const LiftedTriple& lifted, const CrossedElement& x) {
  const int radius = lifted.radius();
  if (x.radius() >= radius) {
    throw Error(ErrorKind::kWindowTooSmall,
                "support radius " + std::to_string(x.radius()) + " needs a window larger than " +
                    std::to_string(radius));
  }
  const TruncatedTriple& base = lifted.base();
  const auto d = static_cast<Eigen::Index>(base.dim());
  ComplexMatrix out = ComplexMatrix::Zero(lifted.half_dim(), lifted.half_dim());
  for (const auto& [g, a] : x.terms) {
    for (int h = -radius; h <= radius; ++h) {
      const int target = g + h;
      if (!lifted.window().contains(target)) continue;
      const ComplexMatrix block = base.represent(lifted.act(-target, a));
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
          out(lifted.index(r, target), lifted.index(c, h)) += block(r, c);
        }
      }
    }
  }
  return out;
}

ComplexMatrix doubled(const ComplexMatrix& half) {
  const Eigen::Index n = half.rows();
  ComplexMatrix out = ComplexMatrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = half;
  out.bottomRightCorner(n, n) = half;
  return out;
}

double interior_norm(const LiftedTriple& lifted, const ComplexMatrix& m, int margin) {
  const int radius = lifted.radius();
  if (margin < 0 || margin >= radius) {
    throw Error(ErrorKind::kWindowTooSmall, "interior margin must lie in [0, L)");
  }
  const Eigen::Index copies = m.cols() / lifted.half_dim();
  const auto d = static_cast<Eigen::Index>(lifted.base().dim());
  std::vector<Eigen::Index> cols;
  for (Eigen::Index copy = 0; copy < copies; ++copy) {
    for (Eigen::Index xi = 0; xi < d; ++xi) {
      for (int g = -(radius - margin); g <= radius - margin; ++g) {
        cols.push_back(copy * lifted.half_dim() + lifted.index(xi, g));
      }
    }
  }
  ComplexMatrix sub(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
  return operator_norm(sub);
}

double interior_commutator_norm(const LiftedTriple& lifted, const ComplexMatrix& half,
                                int margin) {
  // [D_l, M ⊕ M] has off-diagonal blocks [X, M] and [X*, M].
  const ComplexMatrix& x = lifted.upper_block();
  const ComplexMatrix top = x * half - half * x;
  const ComplexMatrix bottom = x.adjoint() * half - half * x.adjoint();
  return std::max(interior_norm(lifted, top, margin), interior_norm(lifted, bottom, margin));
}

ComplexMatrix lifted_unitary(const LiftedTriple& lifted, const Cocycle& c,
                             const AutomorphismSpec& beta, SiteMap sigma, bool require_iso) {
  if (std::abs(std::abs(c.chi) - 1.0) > Tolerances::kStructural) {
    throw Error(ErrorKind::kInvalidInput, "cocycle character must have modulus one");
  }
  const TruncatedTriple& base = lifted.base();
  const ComplexMatrix b = automorphism_matrix(base.algebra(), beta);
  const double intertwine =
      max_abs(b * lifted.action_matrix(1) - lifted.action_matrix(apply_site(sigma, 1)) * b);
  if (intertwine > Tolerances::kStructural) {
    throw Error(ErrorKind::kPrecondition,
                "beta does not intertwine the action (defect " + std::to_string(intertwine) + ")");
  }
  if (require_iso && !iso_check(base, b).in_iso) {
    throw Error(ErrorKind::kPrecondition, "beta is not in Iso of the base triple");
  }
  const ComplexMatrix ub = implementing_unitary(base.gns(), b);
  const auto d = static_cast<Eigen::Index>(base.dim());
  const int radius = lifted.radius();
  ComplexMatrix u = ComplexMatrix::Zero(lifted.half_dim(), lifted.half_dim());
  for (int g = -radius; g <= radius; ++g) {
    const int s = apply_site(sigma, g);
    const Complex phase = c.at(s);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index col = 0; col < d; ++col) {
        u(lifted.index(r, s), lifted.index(col, g)) = phase * ub(r, col);
      }
    }
  }
  return u;
}

CrossedElement transport(const LiftedTriple& lifted, const Cocycle& c,
                         const AutomorphismSpec& beta, SiteMap sigma, const CrossedElement& x) {
  const ComplexMatrix b = automorphism_matrix(lifted.base().algebra(), beta);
  CrossedElement out;
  for (const auto& [g, a] : x.terms) {
    const int s = apply_site(sigma, g);
    out.terms.emplace(s, apply_automorphism(b, a) * c.at(s));
  }
  return out;
}

LiftResidual lift_commutation_check(const LiftedTriple& lifted, const ComplexMatrix& u,
                                    int margin) {
  LiftResidual r;
  r.residual = interior_commutator_norm(lifted, u, margin);
  r.passes = r.residual <= Tolerances::kStructural;
  return r;
}

double covariance_check(const LiftedTriple& lifted, const Cocycle& c,
                        const AutomorphismSpec& beta, SiteMap sigma, const CrossedElement& x,
                        bool require_iso) {
  const ComplexMatrix u = lifted_unitary(lifted, c, beta, sigma, require_iso);
  const ComplexMatrix lhs = represent_crossed(lifted, transport(lifted, c, beta, sigma, x)) * u;
  const ComplexMatrix rhs = u * represent_crossed(lifted, x);
  return interior_norm(lifted, lhs - rhs, x.radius());
}

std::vector<StabilityRow> crossed_commutator_stability(std::shared_ptr<const TruncatedTriple> base,
                                                       const ActionSpec& action,
                                                       const CrossedElement& x) {
  std::vector<StabilityRow> rows;
  const int r = x.radius();
  for (int radius = std::max(2, r + 1); radius <= r + 5; ++radius) {
    const LiftedTriple lifted(base, action, radius);
    rows.push_back({radius, interior_commutator_norm(lifted, represent_crossed(lifted, x), r)});
  }
  return rows;
}

}  // namespace nclab
