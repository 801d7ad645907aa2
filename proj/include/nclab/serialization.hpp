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

#include <json.hpp>

#include "nclab/af_model.hpp"
#include "nclab/connes_metric.hpp"
#include "nclab/crossed_product.hpp"
#include "nclab/gns_dirac.hpp"
#include "nclab/isometries.hpp"

namespace nclab {

using Json = nlohmann::ordered_json;

// Complex numbers are [re, im]; vectors are lists of them; matrices are
// lists of rows.
Json to_json(Complex z);
Json to_json(const ComplexVector& v);
Json to_json(const ComplexMatrix& m);
Complex complex_from_json(const Json& j);
ComplexVector vector_from_json(const Json& j);
ComplexMatrix matrix_from_json(const Json& j);

Json to_json(const FiltrationSpec& f);
FiltrationSpec filtration_from_json(const Json& j);

Json to_json(const DiracSpec& d);
DiracSpec dirac_from_json(const Json& j);

/// {filtration, level, coeffs}.
Json to_json(const AlgebraElement& x);
/// The filtration recorded in `j`, when present, must match the algebra.
AlgebraElement element_from_json(const AlgebraPtr& algebra, const Json& j);

Json to_json(const StateSpec& s);
StateSpec state_from_json(const AlgebraPtr& algebra, const Json& j);

Json to_json(const AutomorphismSpec& a);
AutomorphismSpec automorphism_from_json(const Json& j);

Json to_json(const ActionSpec& a);
ActionSpec action_from_json(const Json& j);

Json to_json(const SolverConfig& c);
/// Missing fields keep their defaults; unknown fields are rejected.
SolverConfig solver_from_json(const Json& j);

Json to_json(const DistanceResult& r);

}  // namespace nclab
