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

#include "nclab/gns_dirac.hpp"

#include <cmath>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

DiracSpec DiracSpec::explicit_values(std::vector<double> lambdas) {
  DiracSpec d;
  d.kind = Kind::kExplicit;
  d.values = std::move(lambdas);
  return d;
}

DiracSpec DiracSpec::geometric(double gamma) {
  DiracSpec d;
  d.kind = Kind::kGeometric;
  d.parameter = gamma;
  return d;
}

DiracSpec DiracSpec::power(double base) {
  DiracSpec d;
  d.kind = Kind::kPower;
  d.parameter = base;
  return d;
}

std::vector<double> DiracSpec::eigenvalues(int depth) const {
  std::vector<double> out(depth + 1, 0.0);
  switch (kind) {
    case Kind::kExplicit:
      if (static_cast<int>(values.size()) < depth) {
        throw Error(ErrorKind::kInvalidInput,
                    "Dirac needs " + std::to_string(depth) + " eigenvalues, got " +
                        std::to_string(values.size()));
      }
      for (int n = 1; n <= depth; ++n) out[n] = values[n - 1];
      break;
    case Kind::kGeometric:
      if (!(parameter > 0.0 && parameter < 1.0)) {
        throw Error(ErrorKind::kInvalidInput, "geometric Dirac needs 0 < gamma < 1");
      }
      for (int n = 1; n <= depth; ++n) out[n] = std::pow(parameter, -(n - 1));
      break;
    case Kind::kPower:
      if (!(parameter > 1.0)) {
        throw Error(ErrorKind::kInvalidInput, "power Dirac needs base > 1");
      }
      for (int n = 1; n <= depth; ++n) out[n] = std::pow(parameter, n - 1);
      break;
  }
  for (int n = 1; n <= depth; ++n) {
    if (!std::isfinite(out[n]) || !(out[n] > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "Dirac eigenvalues must be positive and finite");
    }
  }
  return out;
}

DiracFlags dirac_flags(const std::vector<double>& lambdas) {
  DiracFlags f{true, true, true};
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    for (std::size_t j = i + 1; j < lambdas.size(); ++j) {
      if (lambdas[i] == lambdas[j]) f.pairwise_distinct = false;
    }
    if (i + 1 < lambdas.size()) {
      if (!(lambdas[i] < lambdas[i + 1])) f.strictly_increasing = false;
      if (!(lambdas[i] <= lambdas[i + 1])) f.nondecreasing = false;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// GnsSpace

GnsSpace::GnsSpace(AlgebraPtr algebra, StateSpec state)
    : algebra_(std::move(algebra)), state_(std::move(state)) {
  validate_state(*algebra_, state_);
  const auto d = static_cast<Eigen::Index>(dim());
  if (is_tracial(state_)) {
    identity_ = true;
    transform_ = ComplexMatrix::Identity(d, d);
    inverse_ = transform_;
    return;
  }
  if (const auto* p = std::get_if<ProductState>(&state_)) {
    build_product(*p);
  } else {
    build_general();
  }
  inverse_ = transform_.partialPivLu().inverse();
}

ComplexMatrix GnsSpace::canonical_gram(int level) const {
  // φ(e_i e_j) = tr(ρ e_i e_j) with ρ the moment vector; this equals entry
  // (j, i) of left multiplication by ρ.
  const ComplexVector rho = state_moments(*algebra_, state_, level);
  const ComplexMatrix l = algebra_->left_multiplication(rho, level);
  const ComplexMatrix g = l.transpose();
  return (g + g.adjoint()) / 2.0;
}

void GnsSpace::build_product(const ProductState& p) {
  const AfAlgebra& alg = *algebra_;
  const int k = alg.local_dim();
  const int id = alg.identity_label();
  const int depth = alg.depth();
  // coeffs[s](a-1, b-1): component along E_a of the b-th orthonormal vector.
  std::vector<ComplexMatrix> coeffs(depth, ComplexMatrix::Identity(id, id));
  for (int s = 0; s < static_cast<int>(p.densities.size()); ++s) {
    const ComplexMatrix& rho = p.densities[s];
    const InnerProduct inner = [&rho](const ComplexMatrix& x, const ComplexMatrix& y) {
      return (rho * x.adjoint() * y).trace();
    };
    std::vector<ComplexMatrix> inputs;
    inputs.push_back(alg.slot_basis(id));
    for (int l = 1; l < id; ++l) inputs.push_back(alg.slot_basis(l));
    const auto out = orthonormalize(inputs, inner);
    for (int b = 1; b <= id; ++b) {
      const ComplexMatrix& f = b == id ? out[0] : out[b];
      for (int a = 1; a <= id; ++a) {
        coeffs[s](a - 1, b - 1) = (alg.slot_basis(a) * f).trace() / static_cast<double>(k);
      }
    }
  }
  const auto d = static_cast<Eigen::Index>(dim());
  transform_ = ComplexMatrix::Zero(d, d);
  for (Eigen::Index w = 0; w < d; ++w) {
    const auto& ww = alg.basis_index(static_cast<std::size_t>(w)).word;
    for (Eigen::Index u = 0; u < d; ++u) {
      const auto& uw = alg.basis_index(static_cast<std::size_t>(u)).word;
      Complex v = 1.0;
      for (int s = 0; s < depth && v != Complex(0.0); ++s) {
        v *= coeffs[s](uw[s] - 1, ww[s] - 1);
      }
      transform_(u, w) = v;
    }
  }
}

void GnsSpace::build_general() {
  const ComplexMatrix g = canonical_gram(algebra_->depth());
  Eigen::LLT<ComplexMatrix> llt(g);
  const auto n = g.rows();
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kDegeneracy,
                "state " + state_name(state_) + " is not faithful: Gram matrix is singular");
  }
  const ComplexMatrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pivot = std::norm(l(i, i));
    if (!(pivot > Tolerances::kGramPivot * std::max(1.0, g(i, i).real()))) {
      throw Error(ErrorKind::kDegeneracy,
                  "state " + state_name(state_) + " is not faithful: Gram pivot " +
                      std::to_string(pivot) + " at index " + std::to_string(i));
    }
  }
  // G = U^* U with U = L^*; T = U^{-1} is upper triangular and T^* G T = I.
  const ComplexMatrix u = l.adjoint();
  transform_ = u.triangularView<Eigen::Upper>().solve(ComplexMatrix::Identity(n, n));
}

// ---------------------------------------------------------------------------
// TruncatedTriple

TruncatedTriple::TruncatedTriple(std::shared_ptr<const GnsSpace> gns, DiracSpec dirac,
                                 int level)
    : gns_(std::move(gns)), dirac_(std::move(dirac)), level_(level) {
  if (level_ < 0 || level_ > gns_->algebra().depth()) {
    throw Error(ErrorKind::kInvalidInput, "triple level outside the filtration");
  }
  lambdas_ = dirac_.eigenvalues(gns_->algebra().depth());
  lambdas_.resize(level_ + 1);
  const auto d = static_cast<Eigen::Index>(dim());
  diag_.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    diag_(j) = lambdas_[gns_->grade_of(static_cast<std::size_t>(j))];
  }
}

ComplexMatrix TruncatedTriple::dirac() const {
  return diag_.cast<Complex>().asDiagonal();
}

std::pair<std::size_t, std::size_t> TruncatedTriple::q_range(int n) const {
  if (n < 0 || n > level_) throw Error(ErrorKind::kInvalidInput, "Q index outside 0..level");
  const std::size_t begin = n == 0 ? 0 : algebra().dim(n - 1);
  return {begin, algebra().dim(n)};
}

ComplexMatrix TruncatedTriple::q_projection(int n) const {
  const auto [b, e] = q_range(n);
  const auto d = static_cast<Eigen::Index>(dim());
  ComplexMatrix q = ComplexMatrix::Zero(d, d);
  for (std::size_t i = b; i < e; ++i) q(i, i) = 1.0;
  return q;
}

ComplexMatrix TruncatedTriple::p_projection(int n) const {
  const auto d = static_cast<Eigen::Index>(dim());
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i < q_range(n).second; ++i) p(i, i) = 1.0;
  return p;
}

ComplexMatrix TruncatedTriple::represent(const AlgebraElement& a) const {
  if (!(a.algebra().spec() == algebra().spec())) {
    throw Error(ErrorKind::kInvalidInput, "element from another filtration");
  }
  if (a.level() > level_) {
    throw Error(ErrorKind::kInvalidInput,
                "element of level " + std::to_string(a.level()) +
                    " does not act on H_" + std::to_string(level_));
  }
  const ComplexMatrix l =
      algebra().left_multiplication(a.embed(level_).coeffs(), level_);
  if (gns_->identity_transform()) return l;
  const auto d = static_cast<Eigen::Index>(dim());
  return gns_->inverse_transform().topLeftCorner(d, d) * l *
         gns_->transform().topLeftCorner(d, d);
}

ComplexMatrix TruncatedTriple::commutator_with(const ComplexMatrix& m) const {
  // (D M − M D)_{ij} = (λ_i − λ_j) M_{ij} for diagonal D.
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = (diag_(i) - diag_(j)) * m(i, j);
  }
  return out;
}

ComplexMatrix TruncatedTriple::commutator(const AlgebraElement& a) const {
  return commutator_with(represent(a));
}

double TruncatedTriple::commutator_norm(const AlgebraElement& a) const {
  return operator_norm(commutator(a));
}

RealMatrix TruncatedTriple::block_norms(const ComplexMatrix& m) const {
  RealMatrix out(level_ + 1, level_ + 1);
  for (int i = 0; i <= level_; ++i) {
    const auto [bi, ei] = q_range(i);
    for (int j = 0; j <= level_; ++j) {
      const auto [bj, ej] = q_range(j);
      out(i, j) = operator_norm(m.block(bi, bj, ei - bi, ej - bj));
    }
  }
  return out;
}

RealMatrix TruncatedTriple::block_norms(const AlgebraElement& a) const {
  return block_norms(represent(a));
}

TruncatedTriple TruncatedTriple::at_level(int l) const {
  if (l > level_) throw Error(ErrorKind::kInvalidInput, "at_level above the triple level");
  return TruncatedTriple(gns_, dirac_, l);
}

TruncatedTriple build_triple(AlgebraPtr algebra, const StateSpec& state,
                             const DiracSpec& dirac) {
  const int depth = algebra->depth();
  auto gns = std::make_shared<const GnsSpace>(std::move(algebra), state);
  return TruncatedTriple(std::move(gns), dirac, depth);
}

TruncatedTriple build_triple(const FiltrationSpec& filtration, const StateSpec& state,
                             const DiracSpec& dirac) {
  return build_triple(AfAlgebra::create(filtration), state, dirac);
}

}  // namespace nclab
