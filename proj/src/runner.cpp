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

#include "nclab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

[[noreturn]] void usage(const std::string& what) { throw Error(ErrorKind::kInvalidInput, what); }

// ---------------------------------------------------------------------------
// Config helpers

FiltrationSpec filtration_or(const ExperimentConfig& c, const FiltrationSpec& fallback) {
  FiltrationSpec f = c.filtration.value_or(fallback);
  if (c.depth > 0) f.depth = c.depth;
  return f;
}

DiracSpec dirac_or(const ExperimentConfig& c, const DiracSpec& fallback) {
  if (c.dirac) return *c.dirac;
  if (!c.lambda.empty()) return DiracSpec::explicit_values(c.lambda);
  return fallback;
}

StateSpec reference_state(const ExperimentConfig& c, const AlgebraPtr& alg) {
  if (!c.reference.is_null()) return state_from_json(alg, c.reference);
  if (alg->is_cantor()) return UniformMeasure{};
  return TraceState{};
}

std::shared_ptr<const TruncatedTriple> make_triple(const AlgebraPtr& alg, const StateSpec& s,
                                                   const DiracSpec& d) {
  return std::make_shared<const TruncatedTriple>(build_triple(alg, s, d));
}

Json base_record(const ExperimentConfig& c, const std::string& what) {
  Json r;
  r["command"] = c.command;
  r["case"] = what;
  return r;
}

void push(RunResult& out, Json record, bool pass) {
  record["pass"] = pass;
  out.passed = out.passed && pass;
  out.records.push_back(std::move(record));
}

bool all_true(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

Json bools(const std::vector<bool>& v) {
  Json j = Json::array();
  for (bool b : v) j.push_back(b);
  return j;
}

// ---------------------------------------------------------------------------
// distance

void run_car(const ExperimentConfig& c, RunResult& out) {
  const std::vector<double> lambda = c.lambda.empty() ? std::vector<double>{1, 2, 4, 8} : c.lambda;
  const int depth = c.depth > 0 ? c.depth : static_cast<int>(lambda.size());
  const auto alg = AfAlgebra::create(FiltrationSpec::uhf(2, depth));
  const auto triple = make_triple(alg, TraceState{}, DiracSpec::explicit_values(lambda));
  std::vector<int> ns;
  if (c.n >= 0) {
    if (c.n + 1 > depth) usage("--n must satisfy n + 1 <= depth");
    ns.push_back(c.n);
  } else {
    for (int n = 0; n + 1 <= std::min(depth, 3); ++n) ns.push_back(n);
  }
  std::vector<int> ls = c.l > 0 ? std::vector<int>{c.l} : std::vector<int>{1, 2, 3};
  for (int l : ls) {
    if (l < 1 || l > 3) usage("--l must be 1, 2 or 3");
  }
  for (int n : ns) {
    for (int l : ls) {
      const AlgebraElement v = bloch_vector_element(alg, n, l);
      const auto p = reduce_search_level(make_problem(triple, TraceState{}, VectorState{v}));
      const DistanceResult r = distance(p, c.solver);
      const double upper = car_certified_upper_bound(*triple, n, l);
      const double expected = 1.0 / triple->lambda(n + 1);
      Json rec = base_record(c, "car");
      rec["n"] = n;
      rec["l"] = l;
      rec["lambda"] = lambda;
      rec["expected"] = expected;
      rec["lower_bound"] = r.lower_bound;
      rec["upper_bound"] = upper;
      rec["certificate"] = r.certificate;
      rec["search_level"] = r.search_level;
      push(out, rec,
           r.lower_bound >= expected - Tolerances::kOptimization &&
               r.lower_bound <= expected + Tolerances::kFeasibility && upper == expected);
    }
  }
}

void run_worked_example(const ExperimentConfig& c, RunResult& out) {
  const std::vector<double> lambda = c.lambda.empty() ? std::vector<double>{1, 2} : c.lambda;
  const int depth = c.depth > 0 ? c.depth : static_cast<int>(lambda.size());
  const auto alg = AfAlgebra::create(FiltrationSpec::uhf(2, depth));
  const auto triple = make_triple(alg, TraceState{}, DiracSpec::explicit_values(lambda));
  ComplexMatrix vm = ComplexMatrix::Zero(2, 2);
  vm(0, 1) = std::sqrt(2.0);
  const auto v = AlgebraElement::from_matrix(alg, vm);
  const auto p = reduce_search_level(make_problem(triple, VectorState{v}, TraceState{}));
  const DistanceResult r = distance(p, c.solver);
  const double expected = 1.0 / triple->lambda(1);
  Json rec = base_record(c, "worked-example");
  rec["lambda"] = lambda;
  rec["expected"] = expected;
  rec["distance"] = to_json(r);
  push(out, rec, std::abs(r.lower_bound - expected) <= Tolerances::kOptimization &&
                     r.upper_bound && std::abs(*r.upper_bound - expected) <= Tolerances::kOptimization);

  double worst = 0.0;
  Json betas = Json::array();
  for (double beta : {-3.0, -0.5, 0.25, 1.0, 2.5}) {
    const Eigen::Index rest = Eigen::Index{1} << (depth - 1);
    const ComplexMatrix s3 = kron(pauli(3), ComplexMatrix::Identity(rest, rest));
    const auto x = AlgebraElement::from_matrix(alg, beta * s3);
    const double norm = triple->commutator_norm(x);
    worst = std::max(worst, std::abs(norm - std::abs(beta) * triple->lambda(1)));
    betas.push_back({{"beta", beta}, {"commutator_norm", norm}});
  }
  Json rec2 = base_record(c, "sigma3-commutator");
  rec2["samples"] = betas;
  rec2["max_error"] = worst;
  push(out, rec2, worst <= Tolerances::kStructural);
}

void run_general_distance(const ExperimentConfig& c, RunResult& out) {
  if (c.first.is_null() || c.second.is_null()) {
    usage("distance needs 'first' and 'second' states (or --car / --worked-example)");
  }
  const auto alg = AfAlgebra::create(filtration_or(c, FiltrationSpec::uhf(2, 2)));
  const DiracSpec fallback =
      alg->is_cantor() ? DiracSpec::geometric(c.gamma) : DiracSpec::power(2.0);
  const auto triple = make_triple(alg, reference_state(c, alg), dirac_or(c, fallback));
  const StateSpec s1 = state_from_json(alg, c.first);
  const StateSpec s2 = state_from_json(alg, c.second);
  const auto p = reduce_search_level(make_problem(triple, s1, s2));
  const DistanceResult r = distance(p, c.solver);
  Json rec = base_record(c, "distance");
  rec["filtration"] = to_json(alg->spec());
  rec["dirac"] = to_json(triple->dirac_spec());
  rec["reference"] = to_json(triple->state());
  rec["first"] = to_json(s1);
  rec["second"] = to_json(s2);
  rec["distance"] = to_json(r);
  push(out, rec, r.witness_commutator_norm <= 1.0 + Tolerances::kFeasibility);
}

// ---------------------------------------------------------------------------
// iso-check

UhfAutomorphism random_uhf(int depth, int s, std::mt19937_64& rng) {
  UhfAutomorphism u;
  if (s % 3 != 0) {
    u.permutation.resize(depth);
    std::iota(u.permutation.begin(), u.permutation.end(), 0);
    std::shuffle(u.permutation.begin(), u.permutation.end(), rng);
  }
  if (s % 2 == 0) {
    for (int i = 0; i < depth; ++i) u.locals.push_back(random_unitary(2, rng));
  }
  if (s % 5 == 4) u.blocks.push_back({s % (depth - 1), 2, random_unitary(4, rng)});
  return u;
}

void verdict_record(const ExperimentConfig& c, RunResult& out, const std::string& what,
                    const TruncatedTriple& t, const AutomorphismSpec& a, int& misses) {
  const ComplexMatrix alpha = automorphism_matrix(t.algebra(), a);
  const IsoVerdict v = iso_check(t, alpha);
  std::vector<int> levels = block_levels(t.lambdas());
  const bool predicted = v.state_preserved && all_true(filtration_check(t.algebra(), alpha, levels));
  Json rec = base_record(c, what);
  rec["automorphism"] = automorphism_name(a);
  rec["lambda"] = std::vector<double>(t.lambdas().begin() + 1, t.lambdas().end());
  rec["state_preserved"] = v.state_preserved;
  rec["filtration_levels_preserved"] = bools(v.filtration_levels_preserved);
  rec["block_levels"] = levels;
  rec["commutator_residual"] = v.commutator_residual ? Json(*v.commutator_residual) : Json(nullptr);
  rec["in_iso"] = v.in_iso;
  rec["predicted"] = predicted;
  if (v.in_iso != predicted) ++misses;
  push(out, rec, v.in_iso == predicted);
}

void run_roundtrip(const ExperimentConfig& c, RunResult& out) {
  std::mt19937_64 rng(c.seed);
  int misses = 0, total = 0;
  const auto uhf = make_triple(AfAlgebra::create(FiltrationSpec::uhf(2, 3)), TraceState{},
                               DiracSpec::explicit_values({1, 2, 4}));
  for (int s = 0; s < 30; ++s, ++total) {
    verdict_record(c, out, "structural", *uhf, random_uhf(3, s, rng), misses);
  }
  const auto cantor = make_triple(AfAlgebra::create(FiltrationSpec::cantor(3)), UniformMeasure{},
                                  DiracSpec::geometric(c.gamma));
  for (int s = 0; s < 25; ++s, ++total) {
    TreePortrait g{std::vector<int>(7)};
    for (int& b : g.bits) b = static_cast<int>(rng() & 1);
    verdict_record(c, out, "structural", *cantor, g, misses);
  }
  for (int s = 0; s < 15; ++s, ++total) {
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    verdict_record(c, out, "adversarial", *cantor, LeafPermutation{perm}, misses);
  }
  // Tied eigenvalues: the switch inside a block becomes admissible.
  bool tied_flip = true;
  for (auto lam : {std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 2}}) {
    const auto t = make_triple(AfAlgebra::create(FiltrationSpec::uhf(2, 3)), TraceState{},
                               DiracSpec::explicit_values(lam));
    for (int a = 0; a < 2; ++a, ++total) {
      UhfAutomorphism sw;
      sw.permutation = {0, 1, 2};
      std::swap(sw.permutation[a], sw.permutation[a + 1]);
      const std::size_t before = out.records.size();
      verdict_record(c, out, "tied", *t, sw, misses);
      const bool inside = lam[a] == lam[a + 1];
      tied_flip = tied_flip && out.records[before]["in_iso"].get<bool>() == inside;
    }
    for (int s = 0; s < 6; ++s, ++total) verdict_record(c, out, "tied", *t, random_uhf(3, s, rng), misses);
  }
  Json summary = base_record(c, "roundtrip-summary");
  summary["checked"] = total;
  summary["misclassified"] = misses;
  summary["tied_switch_in_iso"] = tied_flip;
  push(out, summary, misses == 0 && tied_flip && total >= 60);
}

void run_iso_check(const ExperimentConfig& c, RunResult& out) {
  if (c.roundtrip) return run_roundtrip(c, out);
  if (!c.automorphism) usage("iso-check needs an automorphism (or --roundtrip)");
  const auto alg = AfAlgebra::create(filtration_or(c, FiltrationSpec::uhf(2, 3)));
  const DiracSpec fallback =
      alg->is_cantor() ? DiracSpec::geometric(c.gamma) : DiracSpec::power(2.0);
  const auto t = make_triple(alg, reference_state(c, alg), dirac_or(c, fallback));
  int misses = 0;
  verdict_record(c, out, "verdict", *t, *c.automorphism, misses);
}

// ---------------------------------------------------------------------------
// iso-enumerate, cantor-metric

void run_enumerate(const ExperimentConfig& c, RunResult& out, const ProgressCallback& progress) {
  if (c.filtration && c.filtration->family != Family::kCantor) {
    usage("iso-enumerate supports the Cantor filtration only");
  }
  const int depth = c.depth > 0 ? c.depth : (c.filtration ? c.filtration->depth : 3);
  const auto t = make_triple(AfAlgebra::create(FiltrationSpec::cantor(depth)), UniformMeasure{},
                             dirac_or(c, DiracSpec::geometric(c.gamma)));
  const EnumerationReport r =
      enumerate_cantor_iso(*t, c.exhaustive, c.progress ? progress : ProgressCallback{}, c.seed);
  Json rec = base_record(c, "enumeration");
  rec["depth"] = r.depth;
  rec["log2_expected_order"] = r.log2_expected_order;
  rec["portraits_checked"] = r.portraits_checked;
  rec["portraits_in_iso"] = r.portraits_in_iso;
  rec["portraits_exhaustive"] = r.portraits_exhaustive;
  rec["permutations_scanned"] = r.permutations_scanned;
  rec["permutations_in_iso"] = r.permutations_in_iso;
  rec["scan_matches_portraits"] = r.scan_matches_portraits;
  rec["composition_law_holds"] = r.composition_law_holds;
  rec["order"] = r.order;
  bool pass = r.portraits_in_iso == r.portraits_checked && r.composition_law_holds;
  if (c.exhaustive) {
    pass = pass && r.scan_matches_portraits &&
           r.permutations_in_iso == (std::uint64_t{1} << r.log2_expected_order);
  }
  push(out, rec, pass);
}

void run_cantor_metric(const ExperimentConfig& c, RunResult& out) {
  const int depth = c.depth > 0 ? c.depth : 3;
  const MClassReport r = m_invariance_experiment(c.gamma, depth, c.solver, c.seed);
  Json rec = base_record(c, "m-invariance");
  rec["gamma"] = r.gamma;
  rec["depth"] = r.depth;
  rec["pairs"] = r.pairs;
  rec["class_sizes"] = r.class_sizes;
  rec["class_values"] = r.class_values;
  rec["max_spread"] = r.max_spread;
  rec["min_gap"] = r.min_gap;
  rec["portraits_preserve_m"] = r.portraits_preserve_m;
  rec["violator_changes_m"] = r.violator_changes_m;
  rec["violator_in_iso"] = r.violator_in_iso;
  rec["violator_distance_change"] = r.violator_distance_change;
  push(out, rec,
       r.max_spread <= 2e-5 && r.min_gap > 0 && r.min_gap >= 10 * r.max_spread &&
           r.portraits_preserve_m && r.violator_changes_m && !r.violator_in_iso);
}

// ---------------------------------------------------------------------------
// switch-violation, flip-demo, shift-inequality

void run_switch(const ExperimentConfig& c, RunResult& out) {
  const std::vector<double> lambda = c.lambda.empty() ? std::vector<double>{1, 2, 4} : c.lambda;
  const int depth = static_cast<int>(lambda.size());
  const auto alg = AfAlgebra::create(FiltrationSpec::uhf(2, depth));
  const auto t = make_triple(alg, TraceState{}, DiracSpec::explicit_values(lambda));
  const AlgebraElement v = bloch_vector_element(alg, 0, c.l > 0 ? c.l : 3);
  std::vector<int> ks;
  if (c.k >= 0) {
    ks.push_back(c.k);
  } else {
    for (int k = 0; k < depth; ++k) ks.push_back(k);
  }
  for (int k : ks) {
    const SwitchReport r = switch_iso_violation(t, k, v, c.solver);
    const double expected = std::abs(1.0 / t->lambda(1) - 1.0 / t->lambda(k + 1));
    Json rec = base_record(c, "switch");
    rec["k"] = k;
    rec["lambda"] = lambda;
    rec["before_lower"] = r.before.lower_bound;
    rec["before_upper"] = r.before.upper_bound ? Json(*r.before.upper_bound) : Json(nullptr);
    rec["after_lower"] = r.after.lower_bound;
    rec["after_upper"] = r.after.upper_bound ? Json(*r.after.upper_bound) : Json(nullptr);
    rec["gap"] = r.gap;
    rec["expected_gap"] = expected;
    rec["certified_gap"] = r.certified_gap;
    rec["violation"] = r.violation;
    const bool ok = std::abs(r.gap - expected) <= 1e-12 &&
                    (k == 0 ? !r.violation
                            : r.violation && r.certified_gap >= expected - Tolerances::kOptimization);
    push(out, rec, ok);
  }
}

void run_flip(const ExperimentConfig& c, RunResult& out) {
  const FlipReport r = flip_demo(c.d1, c.d2, c.pairs, c.seed);
  Json rec = base_record(c, "flip");
  rec["d1"] = r.d1;
  rec["d2"] = r.d2;
  rec["commutator_norm"] = r.commutator_norm;
  rec["commutator_frobenius"] = r.commutator_frobenius;
  rec["identity_residual"] = r.identity_residual;
  rec["pairs"] = r.pairs;
  rec["max_deviation"] = r.max_deviation;
  rec["max_closed_form_error"] = r.max_closed_form_error;
  rec["unbounded_pairs"] = r.unbounded_pairs;
  rec["unbounded_preserved"] = r.unbounded_preserved;
  rec["flip_not_in_iso"] = r.flip_not_in_iso;
  push(out, rec,
       r.flip_not_in_iso && r.max_deviation <= Tolerances::kOptimization &&
           r.identity_residual < 1e-14 && r.unbounded_preserved);
}

void run_shift(const ExperimentConfig& c, RunResult& out) {
  int max_n = 1;
  for (int n : c.shifts) max_n = std::max(max_n, n);
  const int depth = c.depth > 0 ? c.depth : max_n + 1;
  const auto alg = AfAlgebra::create(FiltrationSpec::uhf(2, depth));
  const auto t = make_triple(alg, TraceState{}, dirac_or(c, DiracSpec::power(3.0)));
  std::mt19937_64 rng(c.seed);
  std::vector<AlgebraElement> xs;
  for (int s = 0; s < c.samples; ++s) {
    xs.emplace_back(alg, 1, random_complex(static_cast<int>(alg->dim(1)), 1, rng).col(0));
  }
  for (int n : c.shifts) {
    double slack = std::numeric_limits<double>::infinity();
    int holds = 0;
    for (const auto& x : xs) {
      const ShiftReport r = shift_inequality_check(*t, x, n, c.c);
      slack = std::min(slack, r.rhs - r.lhs);
      holds += r.holds;
    }
    Json rec = base_record(c, "shift");
    rec["n"] = n;
    rec["c"] = c.c;
    rec["samples"] = c.samples;
    rec["holds"] = holds;
    rec["min_slack"] = slack;
    push(out, rec, holds == c.samples && slack >= -1e-9);
  }
  if (2.0 * t->lambda(1) < t->lambda(2)) {
    double slack = std::numeric_limits<double>::infinity();
    int holds = 0;
    for (const auto& x : xs) {
      const ShiftReport r = shift_special_case(*t, x);
      slack = std::min(slack, r.rhs - r.lhs);
      holds += r.holds;
    }
    Json rec = base_record(c, "shift-special");
    rec["samples"] = c.samples;
    rec["holds"] = holds;
    rec["min_slack"] = slack;
    push(out, rec, holds == c.samples && slack >= -1e-9);
  }
}

// ---------------------------------------------------------------------------
// crossed-lift

CrossedElement random_crossed(const AlgebraPtr& alg, int radius, std::mt19937_64& rng) {
  CrossedElement x;
  const auto d = static_cast<int>(alg->dim(alg->depth()));
  for (int g = -radius; g <= radius; ++g) {
    x.terms.emplace(g, AlgebraElement(alg, alg->depth(), random_complex(d, 1, rng).col(0)));
  }
  return x;
}

struct LiftCase {
  std::string name;
  AutomorphismSpec beta;
  SiteMap sigma = SiteMap::kIdentity;
  bool positive = true;
  bool require_iso = true;
};

void run_lift_family(const ExperimentConfig& c, RunResult& out, const ActionSpec& action,
                     std::mt19937_64& rng) {
  std::shared_ptr<const TruncatedTriple> base;
  std::vector<LiftCase> cases;
  if (std::holds_alternative<OdometerAction>(action)) {
    const int depth = c.depth > 0 ? c.depth : 3;
    base = make_triple(AfAlgebra::create(FiltrationSpec::cantor(depth)), UniformMeasure{},
                       DiracSpec::geometric(c.gamma));
    const int nodes = (1 << depth) - 1;
    const AutomorphismSpec odo = odometer_portrait(depth);
    cases.push_back({"identity", TreePortrait{std::vector<int>(nodes, 0)}});
    cases.push_back({"odometer", odo});
    cases.push_back({"odometer^2", compose(base->algebra(), odo, odo)});
    cases.push_back({"complement+negation", TreePortrait{std::vector<int>(nodes, 1)},
                     SiteMap::kNegation, false});
  } else {
    const auto alg = AfAlgebra::create(filtration_or(c, FiltrationSpec::uhf(2, 2)));
    base = make_triple(alg, TraceState{}, dirac_or(c, DiracSpec::explicit_values({1, 2})));
    const int depth = alg->depth();
    UhfAutomorphism locals;
    for (int s = 0; s < depth; ++s) locals.locals.push_back(random_unitary(alg->local_dim(), rng));
    if (std::holds_alternative<TrivialAction>(action)) {
      cases.push_back({"identity", UhfAutomorphism{}});
      cases.push_back({"local-unitaries", locals});
    } else {
      const AutomorphismSpec gen = std::get<IsoPowerAction>(action).generator;
      cases.push_back({"identity", UhfAutomorphism{}});
      cases.push_back({"generator", gen});
    }
    cases.push_back({"identity+negation", UhfAutomorphism{}, SiteMap::kNegation, false});
    if (depth >= 2 && std::holds_alternative<TrivialAction>(action)) {
      UhfAutomorphism sw;
      sw.permutation.resize(depth);
      std::iota(sw.permutation.begin(), sw.permutation.end(), 0);
      std::swap(sw.permutation[0], sw.permutation[1]);
      cases.push_back({"slot-switch", sw, SiteMap::kIdentity, false, false});
    }
  }
  const LiftedTriple lifted = build_lifted(base, action, c.radius);
  const int support = std::min(2, c.radius - 1);
  const CrossedElement x = random_crossed(base->algebra_ptr(), support, rng);
  for (const auto& lc : cases) {
    for (double angle : c.chi_angles) {
      const Cocycle chi{std::polar(1.0, angle)};
      const ComplexMatrix u = lifted_unitary(lifted, chi, lc.beta, lc.sigma, lc.require_iso);
      const LiftResidual comm = lift_commutation_check(lifted, u);
      const double cov = covariance_check(lifted, chi, lc.beta, lc.sigma, x, lc.require_iso);
      Json rec = base_record(c, lc.positive ? "lift" : "lift-control");
      rec["action"] = action_name(action);
      rec["beta"] = lc.name;
      rec["sigma"] = lc.sigma == SiteMap::kNegation ? "negation" : "identity";
      rec["chi_angle"] = angle;
      rec["radius"] = c.radius;
      rec["support"] = support;
      rec["commutation_residual"] = comm.residual;
      rec["covariance_residual"] = cov;
      const bool ok = lc.positive ? comm.residual < Tolerances::kStructural &&
                                        cov < Tolerances::kStructural
                                  : comm.residual > 0.1;
      push(out, rec, ok);
    }
  }
}

void run_crossed(const ExperimentConfig& c, RunResult& out) {
  std::mt19937_64 rng(c.seed);
  if (c.action) {
    run_lift_family(c, out, *c.action, rng);
    return;
  }
  run_lift_family(c, out, TrivialAction{}, rng);
  run_lift_family(c, out, OdometerAction{}, rng);
}

// ---------------------------------------------------------------------------
// properties

void run_properties(const ExperimentConfig& c, RunResult& out) {
  std::mt19937_64 rng(c.seed);
  const auto alg = AfAlgebra::create(FiltrationSpec::uhf(2, 3));
  const auto t = make_triple(alg, TraceState{}, DiracSpec::explicit_values({1, 2, 4}));
  const int d = static_cast<int>(alg->dim(3));

  {
    double worst = -std::numeric_limits<double>::infinity();
    int violations = 0;
    const int samples = 500;
    for (int s = 0; s < samples; ++s) {
      const AlgebraElement x(alg, 3, random_complex(d, 1, rng).col(0));
      const double full = t->commutator_norm(x);
      for (int n = 0; n <= 2; ++n) {
        const double part = t->commutator_norm(conditional_expectation(x, n));
        worst = std::max(worst, part - full);
        violations += part > full + 1e-10;
      }
    }
    Json rec = base_record(c, "conditional-expectation-contraction");
    rec["samples"] = samples;
    rec["max_excess"] = worst;
    rec["violations"] = violations;
    push(out, rec, violations == 0);
  }
  {
    double residual = 0.0;
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    const ComplexMatrix dm = t->dirac();
    for (int i = 0; i <= 3; ++i) {
      const ComplexMatrix qi = t->q_projection(i);
      sum += qi;
      residual = std::max(residual, (qi - qi.adjoint()).cwiseAbs().maxCoeff());
      residual = std::max(residual, (dm * qi - t->lambda(i) * qi).cwiseAbs().maxCoeff());
      for (int j = 0; j <= 3; ++j) {
        const ComplexMatrix expect = i == j ? qi : ComplexMatrix::Zero(d, d);
        residual = std::max(residual, (qi * t->q_projection(j) - expect).cwiseAbs().maxCoeff());
      }
    }
    residual = std::max(residual, (sum - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff());
    Json rec = base_record(c, "q-projection-algebra");
    rec["residual"] = residual;
    push(out, rec, residual == 0.0);
  }
  {
    ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
    rho(0, 0) = 0.7;
    rho(1, 1) = 0.3;
    rho(0, 1) = Complex(0.1, 0.05);
    rho(1, 0) = std::conj(rho(0, 1));
    double worst = 0.0;
    for (const StateSpec& s : {StateSpec{TraceState{}}, StateSpec{ProductState{{rho, rho, rho}}}}) {
      const auto ts = make_triple(alg, s, DiracSpec::explicit_values({1, 2, 4}));
      for (int k = 0; k < 50; ++k) {
        const int n = 1 + k % 2;
        const AlgebraElement x(alg, n,
                               random_complex(static_cast<int>(alg->dim(n)), 1, rng).col(0));
        worst = std::max(worst, std::abs(ts->at_level(n).commutator_norm(x) -
                                         ts->at_level(n + 1).commutator_norm(x)));
      }
    }
    Json rec = base_record(c, "truncation-independence");
    rec["max_difference"] = worst;
    push(out, rec, worst <= 1e-9);
  }
  {
    const AlgebraElement v(alg, 2, [&] {
      ComplexVector w = random_complex(static_cast<int>(alg->dim(2)), 1, rng).col(0);
      return ComplexVector(w / w.norm());
    }());
    const auto p = reduce_search_level(make_problem(t, TraceState{}, VectorState{v}));
    SolverConfig cfg = c.solver;
    cfg.starts = std::min(cfg.starts, 8);
    const std::string a = to_json(distance(p, cfg)).dump();
    const std::string b = to_json(distance(p, cfg)).dump();
    Json rec = base_record(c, "solver-determinism");
    rec["record_bytes"] = a.size();
    rec["identical"] = a == b;
    push(out, rec, a == b);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

AlgebraElement bloch_vector_element(const AlgebraPtr& algebra, int slot, int label) {
  if (!algebra->is_uhf() || algebra->local_dim() != 2) {
    throw Error(ErrorKind::kInvalidInput, "Bloch vectors live in UHF(2)");
  }
  if (slot < 0 || slot >= algebra->depth() || label < 1 || label > 3) {
    throw Error(ErrorKind::kInvalidInput, "Bloch vector slot or label out of range");
  }
  const auto eig = hermitian_eig(ComplexMatrix(pauli(4) + pauli(label)));
  const ComplexMatrix root = eig.vectors *
                             eig.values.cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal() *
                             eig.vectors.adjoint();
  ComplexMatrix full = ComplexMatrix::Identity(1, 1);
  for (int s = 0; s < slot; ++s) full = kron(full, pauli(4));
  full = kron(full, root);
  return AlgebraElement::from_matrix(algebra, full);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "distance",         "iso-check", "iso-enumerate", "cantor-metric", "switch-violation",
      "flip-demo",        "shift-inequality", "crossed-lift", "properties"};
  return names;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["command"] = c.command;
  j["filtration"] = c.filtration ? to_json(*c.filtration) : Json(nullptr);
  j["dirac"] = c.dirac ? to_json(*c.dirac) : Json(nullptr);
  j["lambda"] = c.lambda;
  j["reference"] = c.reference;
  j["first"] = c.first;
  j["second"] = c.second;
  j["automorphism"] = c.automorphism ? to_json(*c.automorphism) : Json(nullptr);
  j["action"] = c.action ? to_json(*c.action) : Json(nullptr);
  j["solver"] = to_json(c.solver);
  j["seed"] = c.seed;
  j["car"] = c.car;
  j["worked_example"] = c.worked_example;
  j["n"] = c.n;
  j["l"] = c.l;
  j["cantor"] = c.cantor;
  j["depth"] = c.depth;
  j["exhaustive"] = c.exhaustive;
  j["progress"] = c.progress;
  j["roundtrip"] = c.roundtrip;
  j["gamma"] = c.gamma;
  j["k"] = c.k;
  j["d1"] = c.d1;
  j["d2"] = c.d2;
  j["pairs"] = c.pairs;
  j["c"] = c.c;
  j["samples"] = c.samples;
  j["shifts"] = c.shifts;
  j["radius"] = c.radius;
  j["chi_angles"] = c.chi_angles;
  j["output"] = c.output;
  j["table"] = c.table;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) usage("config must be an object");
  ExperimentConfig c;
  const Json defaults = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) usage("unknown config field '" + key + "'");
  }
  auto has = [&](const char* key) { return j.contains(key) && !j.at(key).is_null(); };
  auto read = [&](const char* key, auto& target) {
    if (!has(key)) return;
    try {
      j.at(key).get_to(target);
    } catch (const nlohmann::json::exception&) {
      usage(std::string("config field '") + key + "' has the wrong type");
    }
  };
  read("command", c.command);
  if (has("filtration")) c.filtration = filtration_from_json(j.at("filtration"));
  if (has("dirac")) c.dirac = dirac_from_json(j.at("dirac"));
  read("lambda", c.lambda);
  if (has("reference")) c.reference = j.at("reference");
  if (has("first")) c.first = j.at("first");
  if (has("second")) c.second = j.at("second");
  if (has("automorphism")) c.automorphism = automorphism_from_json(j.at("automorphism"));
  if (has("action")) c.action = action_from_json(j.at("action"));
  if (has("solver")) c.solver = solver_from_json(j.at("solver"));
  read("seed", c.seed);
  read("car", c.car);
  read("worked_example", c.worked_example);
  read("n", c.n);
  read("l", c.l);
  read("cantor", c.cantor);
  read("depth", c.depth);
  read("exhaustive", c.exhaustive);
  read("progress", c.progress);
  read("roundtrip", c.roundtrip);
  read("gamma", c.gamma);
  read("k", c.k);
  read("d1", c.d1);
  read("d2", c.d2);
  read("pairs", c.pairs);
  read("c", c.c);
  read("samples", c.samples);
  read("shifts", c.shifts);
  read("radius", c.radius);
  read("chi_angles", c.chi_angles);
  read("output", c.output);
  read("table", c.table);
  return c;
}

RunResult run(const ExperimentConfig& c, const ProgressCallback& progress) {
  RunResult out;
  if (c.command == "distance") {
    if (c.car) {
      run_car(c, out);
    } else if (c.worked_example) {
      run_worked_example(c, out);
    } else {
      run_general_distance(c, out);
    }
  } else if (c.command == "iso-check") {
    run_iso_check(c, out);
  } else if (c.command == "iso-enumerate") {
    run_enumerate(c, out, progress);
  } else if (c.command == "cantor-metric") {
    run_cantor_metric(c, out);
  } else if (c.command == "switch-violation") {
    run_switch(c, out);
  } else if (c.command == "flip-demo") {
    run_flip(c, out);
  } else if (c.command == "shift-inequality") {
    run_shift(c, out);
  } else if (c.command == "crossed-lift") {
    run_crossed(c, out);
  } else if (c.command == "properties") {
    run_properties(c, out);
  } else {
    usage("unknown command '" + c.command + "'");
  }
  return out;
}

std::string render_table(const std::vector<Json>& records) {
  std::vector<std::string> keys;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.items()) {
      if ((v.is_primitive()) && std::find(keys.begin(), keys.end(), k) == keys.end()) {
        keys.push_back(k);
      }
    }
  }
  auto cell = [](const Json& v) {
    if (v.is_number_float()) {
      std::ostringstream s;
      s << std::setprecision(8) << v.get<double>();
      return s.str();
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  std::vector<std::size_t> width(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    width[i] = keys[i].size();
    for (const auto& r : records) {
      if (r.contains(keys[i])) width[i] = std::max(width[i], cell(r.at(keys[i])).size());
    }
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < keys.size(); ++i) out << std::left << std::setw(width[i] + 2) << keys[i];
  out << '\n';
  for (const auto& r : records) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      out << std::left << std::setw(width[i] + 2) << (r.contains(keys[i]) ? cell(r.at(keys[i])) : "-");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace nclab
