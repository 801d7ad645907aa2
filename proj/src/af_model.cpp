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

#include "nclab/af_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

FiltrationSpec FiltrationSpec::uhf(int k, int depth) {
  return FiltrationSpec{Family::kUhf, k, depth};
}

FiltrationSpec FiltrationSpec::cantor(int depth) {
  return FiltrationSpec{Family::kCantor, 2, depth};
}

std::size_t FiltrationSpec::level_dim(int n) const {
  if (family == Family::kUhf) return ipow(static_cast<std::size_t>(k * k), n);
  return ipow(2, n);
}

std::string FiltrationSpec::tag() const {
  if (family == Family::kUhf) {
    return "UHF(" + std::to_string(k) + ")^" + std::to_string(depth);
  }
  return "Cantor^" + std::to_string(depth);
}

// ---------------------------------------------------------------------------
// AfAlgebra

std::shared_ptr<const AfAlgebra> AfAlgebra::create(const FiltrationSpec& spec) {
  if (spec.depth < 1) {
    throw Error(ErrorKind::kInvalidInput, "filtration depth must be >= 1");
  }
  if (spec.family == Family::kUhf && spec.k < 2) {
    throw Error(ErrorKind::kInvalidInput, "UHF factor size must be >= 2");
  }
  if (spec.level_dim(spec.depth) > (std::size_t{1} << 14)) {
    throw Error(ErrorKind::kUnsupported,
                "algebra " + spec.tag() + " is too large for dense treatment");
  }
  return std::shared_ptr<const AfAlgebra>(new AfAlgebra(spec));
}

AfAlgebra::AfAlgebra(const FiltrationSpec& spec) : spec_(spec) {
  if (spec_.family == Family::kUhf) {
    build_uhf();
  } else {
    spec_.k = 2;
    build_cantor();
  }
  level_dims_.resize(spec_.depth + 1);
  for (int n = 0; n <= spec_.depth; ++n) level_dims_[n] = spec_.level_dim(n);
}

void AfAlgebra::build_uhf() {
  const int k = spec_.k;
  const int k2 = k * k;
  const int depth = spec_.depth;
  const double s = std::sqrt(k / 2.0);

  // Generalized Gell-Mann matrices, orthonormal for the normalized trace;
  // for k = 2 this is (sigma_1, sigma_2, sigma_3, 1).
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      ComplexMatrix sym = ComplexMatrix::Zero(k, k);
      sym(i, j) = s;
      sym(j, i) = s;
      ComplexMatrix asym = ComplexMatrix::Zero(k, k);
      asym(i, j) = -kI * s;
      asym(j, i) = kI * s;
      slot_basis_.push_back(sym);
      slot_basis_.push_back(asym);
    }
  }
  for (int l = 1; l < k; ++l) {
    ComplexMatrix d = ComplexMatrix::Zero(k, k);
    const double f = s * std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) d(j, j) = f;
    d(l, l) = -f * l;
    slot_basis_.push_back(d);
  }
  slot_basis_.push_back(ComplexMatrix::Identity(k, k));

  slot_products_.resize(static_cast<std::size_t>(k2) * k2);
  for (int a = 0; a < k2; ++a) {
    for (int b = 0; b < k2; ++b) {
      const ComplexMatrix p = slot_basis_[a] * slot_basis_[b];
      auto& terms = slot_products_[static_cast<std::size_t>(a) * k2 + b];
      for (int c = 0; c < k2; ++c) {
        const Complex coeff = (slot_basis_[c] * p).trace() / static_cast<double>(k);
        if (std::abs(coeff) > 1e-13) terms.push_back({c + 1, coeff});
      }
    }
  }

  const std::size_t total = ipow(k2, depth);
  std::vector<std::vector<int>> words(total, std::vector<int>(depth));
  std::vector<int> grades(total, 0);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (int slot = depth - 1; slot >= 0; --slot) {
      words[code][slot] = static_cast<int>(rest % k2) + 1;
      rest /= k2;
    }
    for (int slot = depth - 1; slot >= 0; --slot) {
      if (words[code][slot] != k2) {
        grades[code] = slot + 1;
        break;
      }
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (grades[x] != grades[y]) return grades[x] < grades[y];
    return words[x] < words[y];
  });
  code_to_index_.resize(total);
  words_.resize(total * depth);
  basis_.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::size_t code = order[idx];
    code_to_index_[code] = idx;
    basis_.push_back({words[code], grades[code]});
    std::copy(words[code].begin(), words[code].end(),
              words_.begin() + static_cast<std::ptrdiff_t>(idx * depth));
  }
}

void AfAlgebra::build_cantor() {
  const int depth = spec_.depth;
  const int leaves = 1 << depth;
  basis_.push_back({{}, 0});
  for (int g = 1; g <= depth; ++g) {
    const int nodes = 1 << (g - 1);
    for (int p = 0; p < nodes; ++p) {
      std::vector<int> bits(g - 1);
      for (int b = 0; b < g - 1; ++b) bits[b] = (p >> (g - 2 - b)) & 1;
      basis_.push_back({bits, g});
    }
  }
  haar_ = RealMatrix::Zero(leaves, leaves);
  for (int leaf = 0; leaf < leaves; ++leaf) {
    haar_(leaf, 0) = 1.0;
    for (std::size_t i = 1; i < basis_.size(); ++i) {
      const int m = basis_[i].grade - 1;  // node length
      int node = 0;
      for (int b : basis_[i].word) node = (node << 1) | b;
      if ((leaf >> (depth - m)) != node) continue;
      const int next = (leaf >> (depth - m - 1)) & 1;
      const double amp = std::pow(2.0, m / 2.0);
      haar_(leaf, static_cast<Eigen::Index>(i)) = next == 0 ? amp : -amp;
    }
  }
}

std::size_t AfAlgebra::dim(int level) const {
  if (level < 0 || level > spec_.depth) {
    throw Error(ErrorKind::kInvalidInput,
                "level " + std::to_string(level) + " outside 0.." +
                    std::to_string(spec_.depth));
  }
  return level_dims_[level];
}

std::span<const BasisIndex> AfAlgebra::canonical_basis(int level) const {
  return std::span<const BasisIndex>(basis_.data(), dim(level));
}

std::size_t AfAlgebra::uhf_index(std::span<const int> word) const {
  if (!is_uhf()) throw Error(ErrorKind::kInvalidInput, "uhf_index on Cantor algebra");
  const int k2 = identity_label();
  if (static_cast<int>(word.size()) > spec_.depth) {
    throw Error(ErrorKind::kInvalidInput, "word longer than the filtration depth");
  }
  std::size_t code = 0;
  for (int slot = 0; slot < spec_.depth; ++slot) {
    const int label = slot < static_cast<int>(word.size()) ? word[slot] : k2;
    if (label < 1 || label > k2) {
      throw Error(ErrorKind::kInvalidInput,
                  "label " + std::to_string(label) + " outside 1.." + std::to_string(k2));
    }
    code = code * k2 + (label - 1);
  }
  return code_to_index_[code];
}

std::size_t AfAlgebra::cantor_index(int grade, std::span<const int> node) const {
  if (!is_cantor()) throw Error(ErrorKind::kInvalidInput, "cantor_index on UHF algebra");
  if (grade < 0 || grade > spec_.depth) {
    throw Error(ErrorKind::kInvalidInput, "grade outside the filtration");
  }
  if (grade == 0) return 0;
  if (static_cast<int>(node.size()) != grade - 1) {
    throw Error(ErrorKind::kInvalidInput, "wavelet node length must be grade-1");
  }
  std::size_t p = 0;
  for (int b : node) p = (p << 1) | static_cast<std::size_t>(b & 1);
  return (std::size_t{1} << (grade - 1)) + p;
}

const ComplexMatrix& AfAlgebra::slot_basis(int label) const {
  if (!is_uhf() || label < 1 || label > identity_label()) {
    throw Error(ErrorKind::kInvalidInput, "slot_basis: bad label");
  }
  return slot_basis_[label - 1];
}

int AfAlgebra::leaf_index(std::span<const int> bits) const {
  if (static_cast<int>(bits.size()) != spec_.depth) {
    throw Error(ErrorKind::kInvalidInput, "leaf word must have depth bits");
  }
  int leaf = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw Error(ErrorKind::kInvalidInput, "leaf bits must be 0/1");
    leaf = (leaf << 1) | b;
  }
  return leaf;
}

ComplexVector AfAlgebra::multiply(const ComplexVector& a, const ComplexVector& b,
                                  int level) const {
  const std::size_t d = dim(level);
  if (is_cantor()) {
    const auto h = haar_.leftCols(static_cast<Eigen::Index>(d));
    const ComplexVector va = h * a.head(d);
    const ComplexVector vb = h * b.head(d);
    const ComplexVector prod = va.cwiseProduct(vb);
    return (h.transpose() * prod) / static_cast<double>(haar_.rows());
  }
  const ComplexMatrix l = left_multiplication(a, level);
  return l * b.head(d);
}

ComplexMatrix AfAlgebra::left_multiplication(const ComplexVector& a, int level) const {
  const std::size_t d = dim(level);
  if (is_cantor()) {
    const auto h = haar_.leftCols(static_cast<Eigen::Index>(d));
    const ComplexVector va = h * a.head(d);
    return (h.transpose() * va.asDiagonal() * h) / static_cast<double>(haar_.rows());
  }
  const int k2 = identity_label();
  const int depth = spec_.depth;
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  std::vector<std::pair<std::size_t, Complex>> partial;
  std::vector<std::pair<std::size_t, Complex>> next;
  for (std::size_t i = 0; i < d; ++i) {
    const Complex ai = a(static_cast<Eigen::Index>(i));
    if (ai == Complex(0.0)) continue;
    const int* wi = &words_[i * depth];
    for (std::size_t v = 0; v < d; ++v) {
      const int* wv = &words_[v * depth];
      partial.assign(1, {0, ai});
      for (int slot = 0; slot < depth; ++slot) {
        const auto& terms =
            slot_products_[static_cast<std::size_t>(wi[slot] - 1) * k2 + (wv[slot] - 1)];
        if (terms.size() == 1) {
          for (auto& p : partial) {
            p.first = p.first * k2 + (terms[0].label - 1);
            p.second *= terms[0].coeff;
          }
          continue;
        }
        next.clear();
        for (const auto& p : partial) {
          for (const auto& t : terms) {
            next.emplace_back(p.first * k2 + (t.label - 1), p.second * t.coeff);
          }
        }
        partial.swap(next);
      }
      for (const auto& p : partial) {
        out(static_cast<Eigen::Index>(code_to_index_[p.first]),
            static_cast<Eigen::Index>(v)) += p.second;
      }
    }
  }
  return out;
}

ComplexMatrix AfAlgebra::materialize(const ComplexVector& coeffs, int level) const {
  const std::size_t d = dim(level);
  if (is_cantor()) {
    return cell_values(coeffs, level).asDiagonal();
  }
  const int k = spec_.k;
  const Eigen::Index n = static_cast<Eigen::Index>(ipow(k, level));
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < d; ++i) {
    const Complex c = coeffs(static_cast<Eigen::Index>(i));
    if (c == Complex(0.0)) continue;
    ComplexMatrix term = ComplexMatrix::Identity(1, 1);
    for (int slot = 0; slot < level; ++slot) {
      term = kron(term, slot_basis_[basis_[i].word[slot] - 1]);
    }
    out += c * term;
  }
  return out;
}

ComplexVector AfAlgebra::decompose(const ComplexMatrix& m, int level) const {
  const std::size_t d = dim(level);
  if (is_cantor()) {
    if (m.rows() != (1 << level) || m.cols() != m.rows()) {
      throw Error(ErrorKind::kInvalidInput, "decompose: wrong matrix size");
    }
    return from_cell_values(m.diagonal(), level);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(ipow(spec_.k, level));
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorKind::kInvalidInput, "decompose: wrong matrix size");
  }
  ComplexVector out(d);
  for (std::size_t i = 0; i < d; ++i) {
    ComplexMatrix e = ComplexMatrix::Identity(1, 1);
    for (int slot = 0; slot < level; ++slot) {
      e = kron(e, slot_basis_[basis_[i].word[slot] - 1]);
    }
    // tr(e_i M) with e_i self-adjoint: sum over entries of e^T .* M.
    out(static_cast<Eigen::Index>(i)) =
        (e.transpose().cwiseProduct(m)).sum() / static_cast<double>(n);
  }
  return out;
}

ComplexVector AfAlgebra::cell_values(const ComplexVector& coeffs, int level) const {
  const std::size_t d = dim(level);
  const ComplexVector leaf =
      haar_.leftCols(static_cast<Eigen::Index>(d)) * coeffs.head(d);
  const int cells = 1 << level;
  ComplexVector out(cells);
  for (int c = 0; c < cells; ++c) out(c) = leaf(c << (spec_.depth - level));
  return out;
}

ComplexVector AfAlgebra::from_cell_values(const ComplexVector& values, int level) const {
  const int leaves = 1 << spec_.depth;
  ComplexVector leaf(leaves);
  for (int x = 0; x < leaves; ++x) leaf(x) = values(x >> (spec_.depth - level));
  const ComplexVector all = haar_.transpose() * leaf / static_cast<double>(leaves);
  return all.head(dim(level));
}

// ---------------------------------------------------------------------------
// AlgebraElement

AlgebraElement::AlgebraElement(AlgebraPtr algebra, int level, ComplexVector coeffs)
    : algebra_(std::move(algebra)), level_(level), coeffs_(std::move(coeffs)) {
  if (!algebra_) throw Error(ErrorKind::kInvalidInput, "element without algebra");
  if (static_cast<std::size_t>(coeffs_.size()) != algebra_->dim(level_)) {
    throw Error(ErrorKind::kInvalidInput,
                "coefficient count " + std::to_string(coeffs_.size()) +
                    " does not match dim(A_" + std::to_string(level_) + ") = " +
                    std::to_string(algebra_->dim(level_)));
  }
}

AlgebraElement AlgebraElement::zero(AlgebraPtr algebra, int level) {
  const auto d = algebra->dim(level);
  return AlgebraElement(std::move(algebra), level, ComplexVector::Zero(d));
}

AlgebraElement AlgebraElement::identity(AlgebraPtr algebra, int level) {
  auto e = zero(std::move(algebra), level);
  e.coeffs_(0) = 1.0;
  return e;
}

AlgebraElement AlgebraElement::basis_element(AlgebraPtr algebra, std::size_t index) {
  const int level = algebra->grade(index);
  auto e = zero(std::move(algebra), level);
  e.coeffs_(static_cast<Eigen::Index>(index)) = 1.0;
  return e;
}

AlgebraElement AlgebraElement::from_word(AlgebraPtr algebra, std::vector<int> word,
                                         Complex coeff) {
  const std::size_t idx = algebra->uhf_index(word);
  auto e = zero(std::move(algebra), static_cast<int>(word.size()));
  e.coeffs_(static_cast<Eigen::Index>(idx)) = coeff;
  return e;
}

AlgebraElement AlgebraElement::from_matrix(AlgebraPtr algebra, const ComplexMatrix& m) {
  const int base = algebra->is_uhf() ? algebra->local_dim() : 2;
  int level = 0;
  Eigen::Index n = 1;
  while (n < m.rows()) {
    n *= base;
    ++level;
  }
  if (n != m.rows() || m.rows() != m.cols()) {
    throw Error(ErrorKind::kInvalidInput, "from_matrix: size is not a level size");
  }
  if (algebra->is_cantor()) {
    const ComplexMatrix off = m - ComplexMatrix(m.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > Tolerances::kStructural) {
      throw Error(ErrorKind::kInvalidInput, "Cantor elements are diagonal");
    }
  }
  ComplexVector c = algebra->decompose(m, level);
  return AlgebraElement(std::move(algebra), level, std::move(c));
}

Complex AlgebraElement::coeff(std::size_t index) const {
  if (index >= static_cast<std::size_t>(coeffs_.size())) return 0.0;
  return coeffs_(static_cast<Eigen::Index>(index));
}

AlgebraElement AlgebraElement::embed(int level) const {
  if (level < level_) {
    throw Error(ErrorKind::kInvalidInput, "embed: target level below element level");
  }
  ComplexVector c = ComplexVector::Zero(algebra_->dim(level));
  c.head(coeffs_.size()) = coeffs_;
  return AlgebraElement(algebra_, level, std::move(c));
}

AlgebraElement AlgebraElement::restrict_to(int level) const {
  if (level >= level_) return embed(level);
  const auto d = algebra_->dim(level);
  const double tail = coeffs_.tail(coeffs_.size() - d).cwiseAbs().maxCoeff();
  if (tail > Tolerances::kStructural) {
    throw Error(ErrorKind::kInvalidInput,
                "restrict_to: element has components above level " + std::to_string(level));
  }
  return AlgebraElement(algebra_, level, coeffs_.head(d));
}

AlgebraElement AlgebraElement::adjoint() const {
  // The canonical basis is self-adjoint.
  return AlgebraElement(algebra_, level_, coeffs_.conjugate());
}

bool AlgebraElement::is_self_adjoint(double tol) const {
  return coeffs_.size() == 0 || coeffs_.imag().cwiseAbs().maxCoeff() <= tol;
}

ComplexMatrix AlgebraElement::to_matrix() const {
  return algebra_->materialize(coeffs_, level_);
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& other) const {
  require_same_algebra(*this, other);
  const int level = std::max(level_, other.level_);
  auto a = embed(level);
  a.coeffs_ += other.embed(level).coeffs_;
  return a;
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& other) const {
  return *this + other * Complex(-1.0);
}

AlgebraElement AlgebraElement::operator*(Complex s) const {
  return AlgebraElement(algebra_, level_, coeffs_ * s);
}

void require_same_algebra(const AlgebraElement& a, const AlgebraElement& b) {
  if (a.algebra_ptr() != b.algebra_ptr() && !(a.algebra().spec() == b.algebra().spec())) {
    throw Error(ErrorKind::kInvalidInput,
                "filtration mismatch: " + a.algebra().spec().tag() + " vs " +
                    b.algebra().spec().tag());
  }
}

AlgebraElement multiply(const AlgebraElement& a, const AlgebraElement& b) {
  require_same_algebra(a, b);
  const int level = std::max(a.level(), b.level());
  const ComplexVector ca = a.embed(level).coeffs();
  const ComplexVector cb = b.embed(level).coeffs();
  return AlgebraElement(a.algebra_ptr(), level, a.algebra().multiply(ca, cb, level));
}

AlgebraElement conditional_expectation(const AlgebraElement& x, int n) {
  if (n < 0 || n > x.level()) {
    throw Error(ErrorKind::kInvalidInput,
                "conditional_expectation: target level " + std::to_string(n) +
                    " not in 0.." + std::to_string(x.level()));
  }
  const auto d = x.algebra().dim(n);
  return AlgebraElement(x.algebra_ptr(), n, x.coeffs().head(d));
}

AlgebraElement shift_embed(const AlgebraElement& x, int n) {
  const AfAlgebra& alg = x.algebra();
  if (n < 0 || x.level() + n > alg.depth()) {
    throw Error(ErrorKind::kInvalidInput,
                "shift_embed: level " + std::to_string(x.level()) + " + " +
                    std::to_string(n) + " exceeds depth " + std::to_string(alg.depth()));
  }
  const int level = x.level() + n;
  auto out = AlgebraElement::zero(x.algebra_ptr(), level);
  ComplexVector c = ComplexVector::Zero(alg.dim(level));
  if (alg.is_uhf()) {
    const int id = alg.identity_label();
    for (std::size_t i = 0; i < alg.dim(x.level()); ++i) {
      const Complex v = x.coeffs()(static_cast<Eigen::Index>(i));
      if (v == Complex(0.0)) continue;
      const auto& w = alg.basis_index(i).word;
      std::vector<int> shifted(alg.depth(), id);
      for (int s = 0; s + n < alg.depth(); ++s) shifted[s + n] = w[s];
      c(static_cast<Eigen::Index>(alg.uhf_index(shifted))) += v;
    }
  } else {
    const ComplexVector inner = alg.cell_values(x.coeffs(), x.level());
    const int cells = 1 << level;
    ComplexVector values(cells);
    // Drop the first n bits of the cell word.
    for (int cell = 0; cell < cells; ++cell) {
      values(cell) = inner(cell & ((1 << x.level()) - 1));
    }
    c = alg.from_cell_values(values, level);
  }
  return AlgebraElement(x.algebra_ptr(), level, std::move(c));
}

// ---------------------------------------------------------------------------
// States

std::string state_name(const StateSpec& s) {
  struct Visitor {
    std::string operator()(const TraceState&) const { return "trace"; }
    std::string operator()(const UniformMeasure&) const { return "uniform"; }
    std::string operator()(const VectorState& v) const {
      return "vector(level " + std::to_string(v.v.level()) + ")";
    }
    std::string operator()(const CharacterState& c) const {
      std::string w;
      for (int b : c.point) w += static_cast<char>('0' + b);
      return "character(" + w + ")";
    }
    std::string operator()(const ProductState& p) const {
      return "product(" + std::to_string(p.densities.size()) + " slots)";
    }
  };
  return std::visit(Visitor{}, s);
}

bool is_tracial(const StateSpec& s) {
  return std::holds_alternative<TraceState>(s) || std::holds_alternative<UniformMeasure>(s);
}

void validate_state(const AfAlgebra& algebra, const StateSpec& s) {
  if (std::holds_alternative<UniformMeasure>(s) && !algebra.is_cantor()) {
    throw Error(ErrorKind::kInvalidInput, "uniform measure is a Cantor-set state");
  }
  if (const auto* v = std::get_if<VectorState>(&s)) {
    if (!(v->v.algebra().spec() == algebra.spec())) {
      throw Error(ErrorKind::kInvalidInput, "vector state from another filtration");
    }
    const double norm2 = v->v.coeffs().squaredNorm();
    if (std::abs(norm2 - 1.0) > Tolerances::kStructural) {
      throw Error(ErrorKind::kInvalidInput,
                  "vector state not normalized: tr(v^*v) = " + std::to_string(norm2));
    }
  }
  if (const auto* c = std::get_if<CharacterState>(&s)) {
    if (!algebra.is_cantor()) {
      throw Error(ErrorKind::kInvalidInput, "characters exist only on the Cantor algebra");
    }
    (void)algebra.leaf_index(c->point);
  }
  if (const auto* p = std::get_if<ProductState>(&s)) {
    if (!algebra.is_uhf()) {
      throw Error(ErrorKind::kInvalidInput, "product states are defined on UHF algebras");
    }
    if (static_cast<int>(p->densities.size()) > algebra.depth()) {
      throw Error(ErrorKind::kInvalidInput, "more densities than tensor slots");
    }
    for (const auto& rho : p->densities) {
      if (rho.rows() != algebra.local_dim() || rho.cols() != algebra.local_dim()) {
        throw Error(ErrorKind::kInvalidInput, "density has the wrong size");
      }
      if (std::abs(rho.trace() - Complex(1.0)) > Tolerances::kStructural) {
        throw Error(ErrorKind::kInvalidInput, "density must have unit trace");
      }
      const auto eig = hermitian_eig(rho);
      if (eig.values(0) < -Tolerances::kNorm) {
        throw Error(ErrorKind::kInvalidInput, "density is not positive");
      }
    }
  }
}

ComplexVector state_moments(const AfAlgebra& algebra, const StateSpec& s, int level) {
  const std::size_t d = algebra.dim(level);
  ComplexVector m = ComplexVector::Zero(d);
  if (is_tracial(s)) {
    m(0) = 1.0;
    return m;
  }
  if (const auto* v = std::get_if<VectorState>(&s)) {
    // ω_v(x) = tr(x v v^*): the moments are the coefficients of v v^*.
    const AlgebraElement rho = multiply(v->v, v->v.adjoint());
    const std::size_t n = std::min<std::size_t>(d, rho.coeffs().size());
    m.head(n) = rho.coeffs().head(n);
    return m;
  }
  if (const auto* c = std::get_if<CharacterState>(&s)) {
    const int leaf = algebra.leaf_index(c->point);
    for (std::size_t i = 0; i < d; ++i) {
      m(static_cast<Eigen::Index>(i)) = algebra.haar_values()(leaf, static_cast<Eigen::Index>(i));
    }
    return m;
  }
  const auto& p = std::get<ProductState>(s);
  const int id = algebra.identity_label();
  const int slots = static_cast<int>(p.densities.size());
  // Per-slot moment tables Tr(ρ_s E_label).
  std::vector<std::vector<Complex>> table(slots, std::vector<Complex>(id + 1));
  for (int slot = 0; slot < slots; ++slot) {
    for (int label = 1; label <= id; ++label) {
      table[slot][label] = (p.densities[slot] * algebra.slot_basis(label)).trace();
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    const auto& w = algebra.basis_index(i).word;
    Complex value = 1.0;
    for (int slot = 0; slot < algebra.depth(); ++slot) {
      if (slot < slots) {
        value *= table[slot][w[slot]];
      } else if (w[slot] != id) {
        value = 0.0;
      }
      if (value == Complex(0.0)) break;
    }
    m(static_cast<Eigen::Index>(i)) = value;
  }
  return m;
}

Complex evaluate_state(const StateSpec& s, const AlgebraElement& x) {
  const AfAlgebra& alg = x.algebra();
  if (const auto* v = std::get_if<VectorState>(&s)) {
    require_same_algebra(v->v, x);
  }
  if (std::holds_alternative<CharacterState>(s) && !alg.is_cantor()) {
    throw Error(ErrorKind::kInvalidInput, "characters exist only on the Cantor algebra");
  }
  if (std::holds_alternative<ProductState>(s) && !alg.is_uhf()) {
    throw Error(ErrorKind::kInvalidInput, "product states are defined on UHF algebras");
  }
  const ComplexVector m = state_moments(alg, s, x.level());
  return (x.coeffs().transpose() * m)(0);
}

}  // namespace nclab
