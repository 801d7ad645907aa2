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

#include "nclab/connes_metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <ceres/ceres.h>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

// Columns are vec(i·B_j): Hermitian generators, column-major.
ComplexMatrix stack_hermitian(const std::vector<ComplexMatrix>& gens) {
  const Eigen::Index d = gens.front().rows();
  ComplexMatrix out(d * d, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) {
    if (gens[j].rows() != d || gens[j].cols() != d) {
      throw Error(ErrorKind::kInvalidInput, "generators must share one square size");
    }
    out.col(static_cast<Eigen::Index>(j)) =
        kI * Eigen::Map<const ComplexVector>(gens[j].data(), d * d);
  }
  return out;
}

struct Smoothed {
  double value = 0.0;   // smoothed norm
  double top = 0.0;     // exact norm
  ComplexMatrix weight; // gradient matrix W
};

// μ log Σ_k (e^{e_k/μ} + e^{-e_k/μ}) over the spectrum of a Hermitian M.
Smoothed smooth_eval(const ComplexMatrix& m, double mu) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  const RealVector& e = es.eigenvalues();
  const double top = std::max(std::abs(e(0)), std::abs(e(e.size() - 1)));
  RealVector w(e.size());
  double s = 0.0;
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    const double p = std::exp((e(k) - top) / mu);
    const double q = std::exp((-e(k) - top) / mu);
    s += p + q;
    w(k) = p - q;
  }
  w /= s;
  Smoothed out;
  out.top = top;
  out.value = top + mu * std::log(s);
  out.weight = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

double hermitian_norm(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  const RealVector& e = es.eigenvalues();
  return std::max(std::abs(e(0)), std::abs(e(e.size() - 1)));
}

// Affine slice {y : c'·y = 1} of the whitened parameter space, y = y0 + Z z.
struct AffineSlice {
  Eigen::Index d = 0;
  RealMatrix whiten;    // t = whiten · y
  RealMatrix unwhiten;  // y = unwhiten · t on the range
  RealVector c;         // whitened objective
  RealVector y0;
  RealMatrix z;
  ComplexMatrix hz;     // d² × q
  ComplexVector h0;     // d²

  Eigen::Index q() const { return z.cols(); }

  ComplexMatrix matrix(const RealVector& zz) const {
    ComplexVector v = h0;
    if (zz.size() > 0) v += hz * zz.cast<Complex>();
    return Eigen::Map<ComplexMatrix>(v.data(), d, d);
  }
  RealVector y_of(const RealVector& zz) const { return y0 + z * zz; }

  // Projects a parameter direction onto the slice.
  RealVector z_of_direction(const RealVector& t) const {
    const RealVector y = unwhiten * t;
    const double cy = c.dot(y);
    const double ny = y.norm();
    if (!(ny > 0)) return RealVector::Zero(q());
    if (std::abs(cy) > 1e-8 * ny * c.norm()) return z.transpose() * (y / cy - y0);
    return z.transpose() * y / (ny * c.norm());
  }
};

class SmoothedObjective final : public ceres::FirstOrderFunction {
 public:
  SmoothedObjective(const AffineSlice* slice, double mu) : slice_(slice), mu_(mu) {}

  bool Evaluate(const double* params, double* cost, double* gradient) const override {
    const Eigen::Map<const RealVector> zz(params, slice_->q());
    const Smoothed s = smooth_eval(slice_->matrix(zz), mu_);
    if (!std::isfinite(s.value)) return false;
    *cost = s.value;
    if (gradient != nullptr) {
      const Eigen::Map<const ComplexVector> wv(s.weight.data(), s.weight.size());
      Eigen::Map<RealVector>(gradient, slice_->q()) = (slice_->hz.adjoint() * wv).real();
    }
    return true;
  }

  int NumParameters() const override { return static_cast<int>(slice_->q()); }

 private:
  const AffineSlice* slice_;
  double mu_;
};

// Averaged subgradient over the (near-)degenerate top of the spectrum.
RealVector top_subgradient(const AffineSlice& slice, const ComplexMatrix& m, double* norm) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  const RealVector& e = es.eigenvalues();
  const Eigen::Index n = e.size();
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return std::abs(e(a)) > std::abs(e(b)); });
  const double top = std::abs(e(order[0]));
  *norm = top;
  ComplexMatrix w = ComplexMatrix::Zero(n, n);
  int count = 0;
  for (Eigen::Index k : order) {
    if (count == 4 || std::abs(e(k)) < top * (1.0 - 1e-9) - 1e-15) break;
    const double sign = e(k) >= 0 ? 1.0 : -1.0;
    w += sign * es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    ++count;
  }
  w /= static_cast<double>(count);
  const Eigen::Map<const ComplexVector> wv(w.data(), w.size());
  return (slice.hz.adjoint() * wv).real();
}

struct StartOutcome {
  RealVector z;
  double norm = 0.0;
  int iterations = 0;
};

StartOutcome run_start(const AffineSlice& slice, RealVector z, const SolverConfig& cfg) {
  StartOutcome best;
  best.z = z;
  best.norm = hermitian_norm(slice.matrix(z));
  const double scale = best.norm;
  auto consider = [&](const RealVector& cand) {
    const double nrm = hermitian_norm(slice.matrix(cand));
    if (nrm < best.norm) {
      best.norm = nrm;
      best.z = cand;
    }
  };

  // Degenerate line-search polynomials are expected near the optimum.
  static const bool quiet = [] {
    FLAGS_minloglevel = std::max(FLAGS_minloglevel, google::GLOG_ERROR);
    return true;
  }();
  (void)quiet;

  double mu = cfg.smoothing_start * scale;
  int used = 0;
  while (used < cfg.max_iter && mu > 0) {
    ceres::GradientProblemSolver::Options options;
    options.logging_type = ceres::SILENT;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_num_iterations = cfg.max_iter - used;
    options.function_tolerance = 1e-15;
    options.gradient_tolerance = 1e-14;
    options.parameter_tolerance = 1e-15;
    ceres::GradientProblem problem(new SmoothedObjective(&slice, mu));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, z.data(), &summary);
    used += std::max(1, static_cast<int>(summary.iterations.size()) - 1);
    consider(z);
    if (mu <= cfg.smoothing_final * scale) break;
    mu /= cfg.smoothing_decay;
  }

  // Nonsmooth polish from the best point.
  z = best.z;
  double step = 1e-3 * std::max(1.0, z.norm());
  for (int it = 0; it < cfg.polish_iter; ++it) {
    double nrm = 0.0;
    const RealVector g = top_subgradient(slice, slice.matrix(z), &nrm);
    const double gn = g.norm();
    if (!(gn > 0)) break;
    bool accepted = false;
    while (step > 1e-16 * std::max(1.0, z.norm())) {
      const RealVector cand = z - (step / gn) * g;
      const double cn = hermitian_norm(slice.matrix(cand));
      if (cn < nrm * (1.0 - 1e-15)) {
        z = cand;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    ++used;
    if (!accepted) break;
  }
  consider(z);
  best.iterations = used;
  return best;
}

}  // namespace

SmoothedNorm smoothed_norm(const std::vector<ComplexMatrix>& generators, const RealVector& t,
                           double temperature) {
  const ComplexMatrix h = stack_hermitian(generators);
  const Eigen::Index d = generators.front().rows();
  ComplexVector v = h * t.cast<Complex>();
  const Smoothed s = smooth_eval(Eigen::Map<ComplexMatrix>(v.data(), d, d), temperature);
  const Eigen::Map<const ComplexVector> wv(s.weight.data(), s.weight.size());
  return {s.value, (h.adjoint() * wv).real()};
}

SupportResult maximize_support(const ConstraintForm& form, const SolverConfig& cfg,
                               const std::vector<RealVector>& informed) {
  const auto p = static_cast<Eigen::Index>(form.generators.size());
  if (form.objective.size() != p) {
    throw Error(ErrorKind::kInvalidInput, "objective and generator counts differ");
  }
  if (p > Tolerances::kMaxParameters) {
    throw Error(ErrorKind::kUnsupported,
                "parameter count " + std::to_string(p) + " exceeds " +
                    std::to_string(Tolerances::kMaxParameters));
  }
  if (cfg.starts < 1 || cfg.max_iter < 1) {
    throw Error(ErrorKind::kInvalidInput, "solver needs at least one start and iteration");
  }
  SupportResult result;
  result.t = RealVector::Zero(p);
  if (p == 0 || form.objective.cwiseAbs().maxCoeff() <= 1e-14) return result;

  const ComplexMatrix h = stack_hermitian(form.generators);
  const RealMatrix gram = (h.adjoint() * h).real();
  Eigen::SelfAdjointEigenSolver<RealMatrix> ge(gram);
  const double gmax = ge.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> range, kernel;
  for (Eigen::Index k = 0; k < p; ++k) {
    (ge.eigenvalues()(k) > 1e-11 * gmax ? range : kernel).push_back(k);
  }
  const RealVector& c = form.objective;
  for (Eigen::Index k : kernel) {
    const double along = ge.eigenvectors().col(k).dot(c);
    if (std::abs(along) > cfg.tol * std::max(1.0, c.norm())) {
      throw Error(ErrorKind::kUnbounded,
                  "objective has a component " + std::to_string(along) +
                      " along a direction with vanishing commutator");
    }
  }

  AffineSlice slice;
  slice.d = form.generators.front().rows();
  const auto r = static_cast<Eigen::Index>(range.size());
  slice.whiten.resize(p, r);
  slice.unwhiten.resize(r, p);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double ev = ge.eigenvalues()(range[j]);
    slice.whiten.col(j) = ge.eigenvectors().col(range[j]) / std::sqrt(ev);
    slice.unwhiten.row(j) = ge.eigenvectors().col(range[j]).transpose() * std::sqrt(ev);
  }
  slice.c = slice.whiten.transpose() * c;
  if (slice.c.norm() <= 1e-14) return result;
  slice.y0 = slice.c / slice.c.squaredNorm();
  {
    Eigen::HouseholderQR<RealMatrix> qr(slice.c);
    const RealMatrix qfull = qr.householderQ() * RealMatrix::Identity(r, r);
    slice.z = qfull.rightCols(r - 1);
  }
  const ComplexMatrix hw = h * slice.whiten.cast<Complex>();
  slice.h0 = hw * slice.y0.cast<Complex>();
  slice.hz = hw * slice.z.cast<Complex>();

  // Start list: informed directions, the objective, then seeded random ones.
  std::vector<std::pair<std::string, RealVector>> starts;
  for (const auto& dir : informed) {
    if (static_cast<int>(starts.size()) >= cfg.starts - 1) break;
    if (dir.size() == p) starts.emplace_back("witness", dir);
  }
  starts.emplace(starts.begin(), "objective", c);
  for (int s = static_cast<int>(starts.size()); s < cfg.starts; ++s) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> normal(0.0, 1.0);
    RealVector dir(p);
    for (Eigen::Index i = 0; i < p; ++i) dir(i) = normal(rng);
    starts.emplace_back("random", dir);
  }

  RealVector best_z;
  double best_norm = std::numeric_limits<double>::infinity();
  for (const auto& [kind, dir] : starts) {
    const RealVector z0 = slice.z_of_direction(dir);
    StartOutcome out;
    if (slice.q() == 0) {
      out.z = z0;
      out.norm = hermitian_norm(slice.matrix(z0));
    } else {
      out = run_start(slice, z0, cfg);
    }
    result.starts.push_back({kind, 1.0 / out.norm, out.iterations});
    if (out.norm < best_norm) {
      best_norm = out.norm;
      best_z = out.z;
    }
  }

  // Certify in the original coordinates with a full SVD.
  RealVector t = slice.whiten * slice.y_of(best_z);
  ComplexMatrix m = ComplexMatrix::Zero(slice.d, slice.d);
  for (Eigen::Index i = 0; i < p; ++i) m += t(i) * form.generators[i];
  const double nrm = operator_norm(m);
  t /= nrm;
  result.t = t;
  result.value = c.dot(t);
  m /= nrm;
  result.constraint_norm = operator_norm(m);
  if (result.constraint_norm > 1.0 + Tolerances::kFeasibility) {
    result.t /= result.constraint_norm;
    result.value = c.dot(result.t);
    result.constraint_norm = 1.0;
  }
  return result;
}

double brute_force_support(const ConstraintForm& form) {
  const auto p = static_cast<Eigen::Index>(form.generators.size());
  if (p == 0) return 0.0;
  const Eigen::Index d = form.generators.front().rows();
  RealMatrix stacked(2 * d * d, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Map<const ComplexVector> v(form.generators[j].data(), d * d);
    stacked.col(j).head(d * d) = v.real();
    stacked.col(j).tail(d * d) = v.imag();
  }
  Eigen::JacobiSVD<RealMatrix> svd(stacked, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) rank += sv(k) > 1e-12 * sv(0) + 1e-300;
  const RealVector& c = form.objective;
  for (Eigen::Index k = rank; k < p; ++k) {
    if (std::abs(svd.matrixV().col(k).dot(c)) > 1e-9 * std::max(1.0, c.norm())) {
      throw Error(ErrorKind::kUnbounded, "objective meets the commutator kernel");
    }
  }
  if (rank > 4) {
    throw Error(ErrorKind::kUnsupported,
                "brute force handles at most 4 parameters, got " + std::to_string(rank));
  }
  const RealMatrix basis = svd.matrixV().leftCols(rank);
  const RealVector cr = basis.transpose() * c;
  if (cr.norm() <= 1e-14) return 0.0;
  std::vector<ComplexMatrix> gens(rank, ComplexMatrix::Zero(d, d));
  for (Eigen::Index j = 0; j < rank; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) gens[j] += basis(i, j) * form.generators[i];
  }
  auto ratio = [&](const RealVector& u) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    for (Eigen::Index j = 0; j < rank; ++j) m += u(j) * gens[j];
    return cr.dot(u) / operator_norm(m);
  };
  if (rank == 1) return std::abs(ratio(RealVector::Ones(1)));

  std::vector<std::pair<double, RealVector>> grid;
  const double pi = std::numbers::pi;
  if (rank == 2) {
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      RealVector u(2);
      u << std::cos(2 * pi * i / n), std::sin(2 * pi * i / n);
      grid.emplace_back(ratio(u), u);
    }
  } else if (rank == 3) {
    const int n = 20000;
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / n;
      const double rr = std::sqrt(1.0 - z * z);
      RealVector u(3);
      u << rr * std::cos(golden * i), rr * std::sin(golden * i), z;
      grid.emplace_back(ratio(u), u);
    }
  } else {
    const int ne = 40, nx = 64;
    for (int a = 0; a < ne; ++a) {
      const double eta = (a + 0.5) * (pi / 2) / ne;
      for (int b = 0; b < nx; ++b) {
        for (int e = 0; e < nx; ++e) {
          const double x1 = 2 * pi * b / nx, x2 = 2 * pi * e / nx;
          RealVector u(4);
          u << std::cos(eta) * std::cos(x1), std::cos(eta) * std::sin(x1),
              std::sin(eta) * std::cos(x2), std::sin(eta) * std::sin(x2);
          grid.emplace_back(ratio(u), u);
        }
      }
    }
  }
  std::partial_sort(grid.begin(), grid.begin() + 8, grid.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = grid.front().first;
  for (int g = 0; g < 8; ++g) {
    RealVector u = grid[g].second;
    double val = grid[g].first;
    double h = 0.05;
    while (h > 1e-12) {
      bool improved = false;
      for (Eigen::Index j = 0; j < rank && !improved; ++j) {
        for (double sgn : {1.0, -1.0}) {
          RealVector cand = u;
          cand(j) += sgn * h;
          cand.normalize();
          const double cv = ratio(cand);
          if (cv > val) {
            u = cand;
            val = cv;
            improved = true;
            break;
          }
        }
      }
      if (!improved) h *= 0.5;
    }
    best = std::max(best, val);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Distance problems

DistanceProblem make_problem(std::shared_ptr<const TruncatedTriple> triple, StateSpec s1,
                             StateSpec s2) {
  DistanceProblem p;
  p.search_level = triple->level();
  p.triple = std::move(triple);
  p.s1 = std::move(s1);
  p.s2 = std::move(s2);
  return p;
}

namespace {

void validate_problem(const DistanceProblem& p) {
  if (!p.triple) throw Error(ErrorKind::kInvalidInput, "distance problem without a triple");
  validate_state(p.triple->algebra(), p.s1);
  validate_state(p.triple->algebra(), p.s2);
  if (p.search_level < 0 || p.search_level > p.triple->level()) {
    throw Error(ErrorKind::kInvalidInput, "search level outside 0..triple level");
  }
}

ComplexVector moment_difference(const DistanceProblem& p, int level) {
  const AfAlgebra& alg = p.triple->algebra();
  return state_moments(alg, p.s1, level) - state_moments(alg, p.s2, level);
}

// Exact upper bound for the trace against a state living on one slot.
std::optional<double> car_upper(const DistanceProblem& p) {
  const TruncatedTriple& t = *p.triple;
  const AfAlgebra& alg = t.algebra();
  if (!alg.is_uhf() || alg.local_dim() != 2) return std::nullopt;
  if (!std::holds_alternative<TraceState>(t.state())) return std::nullopt;
  if (!t.flags().pairwise_distinct) return std::nullopt;
  const StateSpec* other = nullptr;
  if (std::holds_alternative<TraceState>(p.s1)) {
    other = &p.s2;
  } else if (std::holds_alternative<TraceState>(p.s2)) {
    other = &p.s1;
  } else {
    return std::nullopt;
  }
  const ComplexVector m = state_moments(alg, *other, t.level());
  int slot = -1;
  RealVector bloch = RealVector::Zero(3);
  for (std::size_t i = 1; i < alg.dim(t.level()); ++i) {
    const Complex v = m(static_cast<Eigen::Index>(i));
    if (std::abs(v) <= 1e-12) continue;
    const auto& w = alg.basis_index(i).word;
    int s = -1, count = 0;
    for (int k = 0; k < alg.depth(); ++k) {
      if (w[k] != 4) {
        s = k;
        ++count;
      }
    }
    if (count != 1 || (slot >= 0 && s != slot)) return std::nullopt;
    slot = s;
    bloch(w[s] - 1) = v.real();
  }
  if (slot < 0) return std::nullopt;
  Eigen::Index label = 0;
  bloch.cwiseAbs().maxCoeff(&label);
  const double bound = car_certified_upper_bound(t, slot, static_cast<int>(label) + 1);
  // Pure single-slot states carry |r| = 1; keep the bound exact for them.
  const double r = bloch.norm();
  return std::abs(r - 1.0) <= Tolerances::kStructural ? bound : r * bound;
}

}  // namespace

DistanceProblem reduce_search_level(const DistanceProblem& p) {
  validate_problem(p);
  DistanceProblem out = p;
  const TruncatedTriple& t = *p.triple;
  const AfAlgebra& alg = t.algebra();
  const StateSpec& ref = t.state();
  ComplexVector coords = moment_difference(p, t.level());
  if (const auto* prod = std::get_if<ProductState>(&ref)) {
    (void)prod;
    const auto d = static_cast<Eigen::Index>(t.dim());
    coords = t.gns().transform().topLeftCorner(d, d).transpose() * coords;
  } else if (!is_tracial(ref)) {
    out.no_reduction = true;
    out.reduced = false;
    return out;
  }
  int level = 0;
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    if (std::abs(coords(i)) > 1e-12) level = std::max(level, alg.grade(static_cast<std::size_t>(i)));
  }
  out.search_level = level;
  out.reduced = true;
  out.no_reduction = false;
  return out;
}

ConstraintForm build_constraint(const DistanceProblem& p) {
  validate_problem(p);
  const int n = p.search_level;
  const TruncatedTriple t = p.triple->at_level(n);
  const AfAlgebra& alg = t.algebra();
  const auto d = alg.dim(n);
  ConstraintForm form;
  const ComplexVector diff = moment_difference(p, n);
  if (d > 1 && diff.tail(d - 1).imag().cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorKind::kInvalidInput, "state moments on the self-adjoint basis are not real");
  }
  form.objective = d > 1 ? RealVector(diff.tail(d - 1).real()) : RealVector(0);
  form.generators.reserve(d - 1);
  for (std::size_t i = 1; i < d; ++i) {
    const auto e = AlgebraElement::basis_element(p.triple->algebra_ptr(), i);
    form.generators.push_back(t.commutator(e.embed(n)));
  }
  return form;
}

DistanceResult distance(const DistanceProblem& p, const SolverConfig& cfg) {
  validate_problem(p);
  const int n = p.search_level;
  const AfAlgebra& alg = p.triple->algebra();
  const auto d = alg.dim(n);
  if (static_cast<long long>(d) - 1 > Tolerances::kMaxParameters) {
    throw Error(ErrorKind::kUnsupported,
                "search level " + std::to_string(n) + " needs " + std::to_string(d - 1) +
                    " parameters");
  }
  DistanceResult result;
  result.search_level = n;
  result.parameters = static_cast<int>(d) - 1;
  result.no_reduction = p.no_reduction;

  const ConstraintForm form = build_constraint(p);
  const bool vanishing = form.objective.size() == 0 ||
                         form.objective.cwiseAbs().maxCoeff() <= 1e-14;
  if (vanishing) {
    result.witness = AlgebraElement::zero(p.triple->algebra_ptr(), n);
    if (p.reduced || n == p.triple->level()) {
      result.upper_bound = 0.0;
      result.certificate = "exact-zero";
    } else {
      result.certificate = "lower-bound only";
    }
    return result;
  }

  std::vector<RealVector> informed;
  if (alg.is_uhf()) {
    const int id = alg.identity_label();
    for (int slot = n - 1; slot >= 0; --slot) {
      for (int label = 1; label < id; ++label) {
        std::vector<int> word(n, id);
        word[slot] = label;
        RealVector dir = RealVector::Zero(result.parameters);
        dir(static_cast<Eigen::Index>(alg.uhf_index(word)) - 1) = 1.0;
        informed.push_back(dir);
      }
    }
  }
  const SupportResult sr = maximize_support(form, cfg, informed);
  result.starts = sr.starts;

  ComplexVector coeffs = ComplexVector::Zero(d);
  for (Eigen::Index i = 0; i < sr.t.size(); ++i) coeffs(i + 1) = sr.t(i);
  AlgebraElement w(p.triple->algebra_ptr(), n, coeffs);
  Complex diff = evaluate_state(p.s1, w) - evaluate_state(p.s2, w);
  if (diff.real() < 0) {
    w = w * Complex(-1.0);
    diff = -diff;
  }
  result.witness_value = std::abs(diff);
  result.witness_commutator_norm = p.triple->commutator_norm(w);
  result.lower_bound = result.witness_value / std::max(1.0, result.witness_commutator_norm);
  result.witness = w;

  if (p.reduced || n == p.triple->level()) {
    if (auto upper = car_upper(p)) {
      result.upper_bound = *upper;
      result.certificate = "car-certified";
      return result;
    }
  }
  result.certificate = "lower-bound only";
  return result;
}

double brute_force_distance(const DistanceProblem& p) {
  return brute_force_support(build_constraint(p));
}

double car_certified_upper_bound(const TruncatedTriple& triple, int n, int label) {
  const AfAlgebra& alg = triple.algebra();
  if (!alg.is_uhf() || alg.local_dim() != 2) {
    throw Error(ErrorKind::kPrecondition, "CAR bound needs a UHF(2) triple");
  }
  if (!std::holds_alternative<TraceState>(triple.state())) {
    throw Error(ErrorKind::kPrecondition, "CAR bound needs the trace as reference state");
  }
  if (label < 1 || label > 3) throw Error(ErrorKind::kInvalidInput, "Pauli label must be 1..3");
  if (n < 0 || triple.level() < n + 1) {
    throw Error(ErrorKind::kPrecondition, "CAR bound needs triple level >= n+1");
  }
  if (!triple.flags().pairwise_distinct) {
    throw Error(ErrorKind::kPrecondition, "CAR bound needs pairwise-distinct eigenvalues");
  }
  return 1.0 / triple.lambda(n + 1);
}

CarChainReport validate_car_chain(const TruncatedTriple& triple, int n, int label,
                                  int samples, std::uint64_t seed) {
  const double bound = car_certified_upper_bound(triple, n, label);
  const AfAlgebra& alg = triple.algebra();
  const int level = triple.level();
  const auto d = alg.dim(level);
  std::vector<int> word(n, 4);
  word.push_back(label);
  const auto target = static_cast<Eigen::Index>(alg.uhf_index(word));
  const auto [qb, qe] = triple.q_range(n + 1);
  CarChainReport report;
  report.samples = samples;
  report.worst_link_coefficient = -std::numeric_limits<double>::infinity();
  report.worst_link_compression = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexVector c = ComplexVector::Zero(d);
    for (std::size_t i = 1; i < d; ++i) c(static_cast<Eigen::Index>(i)) = normal(rng);
    AlgebraElement x(triple.algebra_ptr(), level, c);
    x = x * Complex(1.0 / triple.commutator_norm(x));
    // x̃ drops the words with the identity in slot n+1.
    ComplexVector ct = x.coeffs();
    for (std::size_t i = 0; i < d; ++i) {
      if (alg.basis_index(i).word[n] == 4) ct(static_cast<Eigen::Index>(i)) = 0.0;
    }
    const AlgebraElement xt(triple.algebra_ptr(), level, ct);
    const ComplexMatrix rep = triple.represent(xt);
    const double comp = operator_norm(rep.block(0, qb, 1, qe - qb));
    const double alpha = std::abs(xt.coeff(static_cast<std::size_t>(target)));
    report.worst_link_coefficient = std::max(report.worst_link_coefficient, alpha - comp);
    report.worst_link_compression = std::max(
        report.worst_link_compression, comp - bound * triple.commutator_norm(xt));
  }
  report.holds = report.worst_link_coefficient <= 1e-12 && report.worst_link_compression <= 1e-12;
  return report;
}

}  // namespace nclab
