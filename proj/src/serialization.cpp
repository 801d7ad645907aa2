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

#include "nclab/serialization.hpp"

#include <set>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::kInvalidInput, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) bad("unknown field '" + k + "' in " + where);
  }
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

std::string state_kind(const StateSpec& s) {
  struct Visitor {
    std::string operator()(const TraceState&) const { return "trace"; }
    std::string operator()(const UniformMeasure&) const { return "uniform"; }
    std::string operator()(const VectorState&) const { return "vector"; }
    std::string operator()(const CharacterState&) const { return "character"; }
    std::string operator()(const ProductState&) const { return "product"; }
  };
  return std::visit(Visitor{}, s);
}

}  // namespace

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const ComplexVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

Json to_json(const ComplexMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(ComplexVector(m.row(r).transpose())));
  return out;
}

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    bad("complex numbers are written [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

ComplexVector vector_from_json(const Json& j) {
  if (!j.is_array()) bad("expected a list of complex numbers");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) bad("expected a non-empty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const ComplexVector row = vector_from_json(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) bad("matrix rows have different lengths");
    m.row(r) = row.transpose();
  }
  return m;
}

Json to_json(const FiltrationSpec& f) {
  Json j;
  j["family"] = f.family == Family::kUhf ? "uhf" : "cantor";
  if (f.family == Family::kUhf) j["k"] = f.k;
  j["depth"] = f.depth;
  return j;
}

FiltrationSpec filtration_from_json(const Json& j) {
  only_keys(j, {"family", "k", "depth"}, "filtration");
  const auto family = get<std::string>(j, "family");
  const int depth = get<int>(j, "depth");
  if (family == "uhf") return FiltrationSpec::uhf(j.contains("k") ? get<int>(j, "k") : 2, depth);
  if (family == "cantor") return FiltrationSpec::cantor(depth);
  bad("filtration family must be 'uhf' or 'cantor'");
}

Json to_json(const DiracSpec& d) {
  Json j;
  switch (d.kind) {
    case DiracSpec::Kind::kExplicit:
      j["kind"] = "explicit";
      j["values"] = d.values;
      break;
    case DiracSpec::Kind::kGeometric:
      j["kind"] = "geometric";
      j["gamma"] = d.parameter;
      break;
    case DiracSpec::Kind::kPower:
      j["kind"] = "power";
      j["base"] = d.parameter;
      break;
  }
  return j;
}

DiracSpec dirac_from_json(const Json& j) {
  only_keys(j, {"kind", "values", "gamma", "base"}, "dirac");
  const auto kind = get<std::string>(j, "kind");
  if (kind == "explicit") return DiracSpec::explicit_values(get<std::vector<double>>(j, "values"));
  if (kind == "geometric") return DiracSpec::geometric(get<double>(j, "gamma"));
  if (kind == "power") return DiracSpec::power(get<double>(j, "base"));
  bad("dirac kind must be 'explicit', 'geometric' or 'power'");
}

Json to_json(const AlgebraElement& x) {
  Json j;
  j["filtration"] = to_json(x.algebra().spec());
  j["level"] = x.level();
  j["coeffs"] = to_json(x.coeffs());
  return j;
}

AlgebraElement element_from_json(const AlgebraPtr& algebra, const Json& j) {
  only_keys(j, {"filtration", "level", "coeffs", "matrix"}, "element");
  if (j.contains("filtration") && !(filtration_from_json(j.at("filtration")) == algebra->spec())) {
    bad("element filtration does not match the experiment filtration");
  }
  if (j.contains("matrix")) return AlgebraElement::from_matrix(algebra, matrix_from_json(j.at("matrix")));
  const int level = get<int>(j, "level");
  if (level < 0 || level > algebra->depth()) bad("element level outside 0..depth");
  const ComplexVector c = vector_from_json(field(j, "coeffs"));
  if (static_cast<std::size_t>(c.size()) != algebra->dim(level)) {
    bad("element needs " + std::to_string(algebra->dim(level)) + " coefficients at level " +
        std::to_string(level));
  }
  return AlgebraElement(algebra, level, c);
}

Json to_json(const StateSpec& s) {
  Json j;
  j["kind"] = state_kind(s);
  if (const auto* v = std::get_if<VectorState>(&s)) j["v"] = to_json(v->v);
  if (const auto* c = std::get_if<CharacterState>(&s)) j["point"] = c->point;
  if (const auto* p = std::get_if<ProductState>(&s)) {
    j["densities"] = Json::array();
    for (const auto& rho : p->densities) j["densities"].push_back(to_json(rho));
  }
  return j;
}

StateSpec state_from_json(const AlgebraPtr& algebra, const Json& j) {
  only_keys(j, {"kind", "v", "point", "densities"}, "state");
  const auto kind = get<std::string>(j, "kind");
  StateSpec s;
  if (kind == "trace") {
    s = TraceState{};
  } else if (kind == "uniform") {
    s = UniformMeasure{};
  } else if (kind == "vector") {
    s = VectorState{element_from_json(algebra, field(j, "v"))};
  } else if (kind == "character") {
    s = CharacterState{get<std::vector<int>>(j, "point")};
  } else if (kind == "product") {
    ProductState p;
    for (const auto& rho : field(j, "densities")) p.densities.push_back(matrix_from_json(rho));
    s = p;
  } else {
    bad("unknown state kind '" + kind + "'");
  }
  validate_state(*algebra, s);
  return s;
}

Json to_json(const AutomorphismSpec& a) {
  Json j;
  if (const auto* u = std::get_if<UhfAutomorphism>(&a)) {
    j["kind"] = "uhf";
    j["permutation"] = u->permutation;
    j["locals"] = Json::array();
    for (const auto& m : u->locals) j["locals"].push_back(to_json(m));
    j["blocks"] = Json::array();
    for (const auto& b : u->blocks) {
      j["blocks"].push_back({{"first", b.first}, {"count", b.count}, {"unitary", to_json(b.unitary)}});
    }
  } else if (const auto* g = std::get_if<TreePortrait>(&a)) {
    j["kind"] = "portrait";
    j["bits"] = g->bits;
  } else if (const auto* l = std::get_if<LeafPermutation>(&a)) {
    j["kind"] = "leaves";
    j["image"] = l->image;
  } else {
    j["kind"] = "flip";
  }
  return j;
}

AutomorphismSpec automorphism_from_json(const Json& j) {
  only_keys(j, {"kind", "permutation", "locals", "blocks", "bits", "image"}, "automorphism");
  const auto kind = get<std::string>(j, "kind");
  if (kind == "uhf") {
    UhfAutomorphism u;
    if (j.contains("permutation")) u.permutation = get<std::vector<int>>(j, "permutation");
    if (j.contains("locals")) {
      for (const auto& m : j.at("locals")) u.locals.push_back(matrix_from_json(m));
    }
    if (j.contains("blocks")) {
      for (const auto& b : j.at("blocks")) {
        only_keys(b, {"first", "count", "unitary"}, "block");
        u.blocks.push_back({get<int>(b, "first"), get<int>(b, "count"),
                            matrix_from_json(field(b, "unitary"))});
      }
    }
    return u;
  }
  if (kind == "portrait") return TreePortrait{get<std::vector<int>>(j, "bits")};
  if (kind == "leaves") return LeafPermutation{get<std::vector<int>>(j, "image")};
  if (kind == "flip") return FlipM2{};
  bad("unknown automorphism kind '" + kind + "'");
}

Json to_json(const ActionSpec& a) {
  Json j;
  j["kind"] = action_name(a);
  if (const auto* p = std::get_if<IsoPowerAction>(&a)) j["generator"] = to_json(p->generator);
  return j;
}

ActionSpec action_from_json(const Json& j) {
  if (j.is_string()) return action_from_json(Json{{"kind", j}});
  only_keys(j, {"kind", "generator"}, "action");
  const auto kind = get<std::string>(j, "kind");
  if (kind == "trivial") return TrivialAction{};
  if (kind == "odometer") return OdometerAction{};
  if (kind == "iso-power") return IsoPowerAction{automorphism_from_json(field(j, "generator"))};
  bad("action must be 'trivial', 'odometer' or 'iso-power'");
}

Json to_json(const SolverConfig& c) {
  return {{"starts", c.starts},
          {"max_iter", c.max_iter},
          {"tol", c.tol},
          {"seed", c.seed},
          {"smoothing_start", c.smoothing_start},
          {"smoothing_final", c.smoothing_final},
          {"smoothing_decay", c.smoothing_decay},
          {"polish_iter", c.polish_iter}};
}

SolverConfig solver_from_json(const Json& j) {
  only_keys(j, {"starts", "max_iter", "tol", "seed", "smoothing_start", "smoothing_final",
                "smoothing_decay", "polish_iter"},
            "solver");
  SolverConfig c;
  if (j.contains("starts")) c.starts = get<int>(j, "starts");
  if (j.contains("max_iter")) c.max_iter = get<int>(j, "max_iter");
  if (j.contains("tol")) c.tol = get<double>(j, "tol");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("smoothing_start")) c.smoothing_start = get<double>(j, "smoothing_start");
  if (j.contains("smoothing_final")) c.smoothing_final = get<double>(j, "smoothing_final");
  if (j.contains("smoothing_decay")) c.smoothing_decay = get<double>(j, "smoothing_decay");
  if (j.contains("polish_iter")) c.polish_iter = get<int>(j, "polish_iter");
  if (c.starts < 1 || c.max_iter < 1 || !(c.tol > 0)) bad("solver starts, max_iter and tol must be positive");
  return c;
}

Json to_json(const DistanceResult& r) {
  Json j;
  j["lower_bound"] = r.lower_bound;
  j["upper_bound"] = r.upper_bound ? Json(*r.upper_bound) : Json(nullptr);
  j["certificate"] = r.certificate;
  j["search_level"] = r.search_level;
  j["parameters"] = r.parameters;
  j["no_reduction"] = r.no_reduction;
  j["witness_commutator_norm"] = r.witness_commutator_norm;
  j["witness_value"] = r.witness_value;
  j["witness"] = r.witness ? to_json(r.witness->coeffs()) : Json(nullptr);
  Json starts = Json::array();
  for (const auto& s : r.starts) {
    starts.push_back({{"kind", s.kind}, {"objective", s.objective}, {"iterations", s.iterations}});
  }
  j["starts"] = starts;
  return j;
}

}  // namespace nclab
