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

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nclab/af_model.hpp"
#include "nclab/gns_dirac.hpp"
#include "nclab/linalg.hpp"

namespace nclab {

/**
 * Support-function problem sup { c·t : ‖Σ t_i B_i‖ ≤ 1 } over real t, with
 * anti-Hermitian generators B_i. Every distance computation reduces to one.
 */
struct ConstraintForm {
  std::vector<ComplexMatrix> generators;
  RealVector objective;
};

struct SolverConfig {
  int starts = 24;
  int max_iter = 500;
  double tol = 1e-8;
  std::uint64_t seed = 20260101;
  /// Smoothing temperature schedule, relative to the starting norm.
  double smoothing_start = 0.05;
  double smoothing_final = 1e-9;
  double smoothing_decay = 10.0;
  /// Nonsmooth refinement steps after the smoothed phase.
  int polish_iter = 200;
};

struct StartRecord {
  std::string kind;  // objective, witness, random
  double objective = 0.0;
  int iterations = 0;
};

struct SupportResult {
  double value = 0.0;
  RealVector t;  // attains `value` with ‖Σ t_i B_i‖ = 1
  double constraint_norm = 0.0;
  std::vector<StartRecord> starts;
};

/**
 * Multistart maximization of c·t/‖Σ t_i B_i‖. Each `informed` direction is
 * used as one start (its own objective is included as a candidate), then the
 * objective vector, then seeded random directions up to `cfg.starts`.
 * Throws an unbounded error when c has a component along the kernel of t ↦ Σ t_i B_i.
 */
SupportResult maximize_support(const ConstraintForm& form, const SolverConfig& cfg,
                               const std::vector<RealVector>& informed = {});

/// Smoothed objective value and gradient, exposed for finite-difference checks.
struct SmoothedNorm {
  double value = 0.0;
  RealVector gradient;
};
SmoothedNorm smoothed_norm(const std::vector<ComplexMatrix>& generators, const RealVector& t,
                           double temperature);

/// Exhaustive grid plus compass refinement; parameter count (after removing
/// the kernel) at most 4.
double brute_force_support(const ConstraintForm& form);

struct DistanceProblem {
  std::shared_ptr<const TruncatedTriple> triple;
  StateSpec s1;
  StateSpec s2;
  int search_level = 0;
  /// Set by reduce_search_level when a reduction rule applied.
  bool reduced = false;
  bool no_reduction = false;
};

DistanceProblem make_problem(std::shared_ptr<const TruncatedTriple> triple, StateSpec s1,
                             StateSpec s2);

/**
 * Lowers search_level to the least n with s1 − s2 factoring through the
 * conditional expectation onto A_n that preserves the reference state.
 * Available for tracial and product references; otherwise sets no_reduction.
 */
DistanceProblem reduce_search_level(const DistanceProblem& p);

/// Objective c and generators B_i = [D, π(e_i)], i ≥ 1, at the search level.
ConstraintForm build_constraint(const DistanceProblem& p);

struct DistanceResult {
  double lower_bound = 0.0;
  std::optional<double> upper_bound;
  std::string certificate;  // "car-certified", "exact-zero" or "lower-bound only"
  std::optional<AlgebraElement> witness;
  double witness_commutator_norm = 0.0;
  double witness_value = 0.0;
  int search_level = 0;
  int parameters = 0;
  bool no_reduction = false;
  std::vector<StartRecord> starts;
};

DistanceResult distance(const DistanceProblem& p, const SolverConfig& cfg = {});

double brute_force_distance(const DistanceProblem& p);

/**
 * Exact upper bound 1/λ_{n+1} for d(tr, ω) when ω − tr lives on the
 * single-slot words at slot n+1 (UHF(2), trace reference). Requires
 * pairwise-distinct eigenvalues and triple level ≥ n+1.
 */
double car_certified_upper_bound(const TruncatedTriple& triple, int n, int label);

struct CarChainReport {
  int samples = 0;
  /// max over samples of |α_{1..1,l}| − ‖P_0 x Q_{n+1}‖.
  double worst_link_coefficient = 0.0;
  /// max over samples of ‖P_0 x Q_{n+1}‖ − λ_{n+1}^{-1}‖[D,x]‖.
  double worst_link_compression = 0.0;
  bool holds = false;
};

/// Checks both inequality links behind the bound on random feasible x.
CarChainReport validate_car_chain(const TruncatedTriple& triple, int n, int label,
                                  int samples, std::uint64_t seed);

}  // namespace nclab
