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
#include <optional>
#include <string>
#include <vector>

#include "nclab/serialization.hpp"

namespace nclab {

/**
 * One batch experiment. Unset fields take the defaults below; each command
 * reads only the fields it needs. Elements inside states are parsed once
 * the filtration is known, so states stay in record form here.
 */
struct ExperimentConfig {
  std::string command;
  std::optional<FiltrationSpec> filtration;
  std::optional<DiracSpec> dirac;
  std::vector<double> lambda;  // shorthand for an explicit Dirac sequence
  Json reference;              // null: trace (UHF) or uniform measure (Cantor)
  Json first;
  Json second;
  std::optional<AutomorphismSpec> automorphism;
  std::optional<ActionSpec> action;
  SolverConfig solver;
  std::uint64_t seed = 1;

  bool car = false;
  bool worked_example = false;
  int n = -1;  // -1: every admissible value
  int l = 0;   // 0: all three labels
  bool cantor = false;
  int depth = 0;  // 0: command default
  bool exhaustive = false;
  bool progress = false;
  bool roundtrip = false;
  double gamma = 1.0 / 3.0;
  int k = -1;  // -1: every switch index
  double d1 = 0.0;
  double d2 = 1.0;
  int pairs = 100;
  double c = 2.0;
  int samples = 200;
  std::vector<int> shifts{1, 2};
  int radius = 4;
  std::vector<double> chi_angles{0.0, 1.5707963267948966, 1.2566370614359172};

  std::string output;
  bool table = false;
};

Json to_json(const ExperimentConfig& c);
/// Rejects unknown fields and wrong types with an invalid-input error naming the field.
ExperimentConfig config_from_json(const Json& j);

const std::vector<std::string>& command_names();

struct RunResult {
  std::vector<Json> records;
  bool passed = true;
};

/// Runs one command. Every record carries a "pass" flag; the run passes iff all do.
RunResult run(const ExperimentConfig& config, const ProgressCallback& progress = {});

/// Fixed-width text rendering of the scalar fields of each record.
std::string render_table(const std::vector<Json>& records);

/// v with v v* = 1 + σ_label at slot `slot` (identity elsewhere).
AlgebraElement bloch_vector_element(const AlgebraPtr& algebra, int slot, int label);

}  // namespace nclab
