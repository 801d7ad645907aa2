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

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nclab/errors.hpp"
#include "nclab/runner.hpp"

namespace {

using nclab::Json;

enum class Kind { kFlag, kInt, kUint, kDouble, kDoubles, kInts, kJson, kString };

struct FlagSpec {
  const char* flag;
  const char* key;
  Kind kind;
  std::vector<std::string> commands;  // empty: every command
  const char* help;
};

const std::vector<FlagSpec>& flag_table() {
  static const std::vector<FlagSpec> table = {
      {"--seed", "seed", Kind::kUint, {}, "master seed"},
      {"--depth", "depth", Kind::kInt, {}, "truncation depth"},
      {"--lambda", "lambda", Kind::kDoubles, {}, "Dirac eigenvalues, comma separated"},
      {"--gamma", "gamma", Kind::kDouble, {}, "Cantor Dirac parameter"},
      {"--filtration", "filtration", Kind::kJson, {}, "filtration record"},
      {"--dirac", "dirac", Kind::kJson, {}, "Dirac record"},
      {"--reference", "reference", Kind::kJson, {}, "reference state record"},
      {"--solver", "solver", Kind::kJson, {}, "solver settings record"},
      {"--car", "car", Kind::kFlag, {"distance"}, "CAR golden distances"},
      {"--worked-example", "worked_example", Kind::kFlag, {"distance"}, "two-level worked example"},
      {"--n", "n", Kind::kInt, {"distance"}, "slot index for --car"},
      {"--l", "l", Kind::kInt, {"distance", "switch-violation"}, "Pauli label 1..3"},
      {"--first", "first", Kind::kJson, {"distance"}, "first state record"},
      {"--second", "second", Kind::kJson, {"distance"}, "second state record"},
      {"--roundtrip", "roundtrip", Kind::kFlag, {"iso-check"}, "random round-trip suite"},
      {"--automorphism", "automorphism", Kind::kJson, {"iso-check"}, "automorphism record"},
      {"--cantor", "cantor", Kind::kFlag, {"iso-enumerate"}, "Cantor filtration"},
      {"--exhaustive", "exhaustive", Kind::kFlag, {"iso-enumerate"}, "scan every leaf permutation"},
      {"--progress", "progress", Kind::kFlag, {"iso-enumerate"}, "report progress on stderr"},
      {"--k", "k", Kind::kInt, {"switch-violation"}, "switch index"},
      {"--d1", "d1", Kind::kDouble, {"flip-demo"}, "first Dirac eigenvalue"},
      {"--d2", "d2", Kind::kDouble, {"flip-demo"}, "second Dirac eigenvalue"},
      {"--pairs", "pairs", Kind::kInt, {"flip-demo"}, "random state pairs"},
      {"--c", "c", Kind::kDouble, {"shift-inequality"}, "constant c(n)"},
      {"--samples", "samples", Kind::kInt, {"shift-inequality"}, "random elements"},
      {"--shifts", "shifts", Kind::kInts, {"shift-inequality"}, "shift counts n"},
      {"--action", "action", Kind::kString, {"crossed-lift"}, "trivial or odometer"},
      {"--radius", "radius", Kind::kInt, {"crossed-lift"}, "group window radius L"},
      {"--chi-angles", "chi_angles", Kind::kDoubles, {"crossed-lift"}, "cocycle angles in radians"},
  };
  return table;
}

template <class T>
std::vector<T> split_list(const std::string& text, const std::string& flag) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::stringstream cell(item);
    T value;
    if (!(cell >> value) || !(cell >> std::ws).eof()) {
      throw nclab::Error(nclab::ErrorKind::kInvalidInput, flag + " expects a comma-separated list");
    }
    out.push_back(value);
  }
  return out;
}

Json flag_value(const FlagSpec& spec, const std::string& text) {
  const std::string flag = spec.flag;
  switch (spec.kind) {
    case Kind::kFlag:
      return true;
    case Kind::kInt:
      return split_list<int>(text, flag).at(0);
    case Kind::kUint:
      return split_list<std::uint64_t>(text, flag).at(0);
    case Kind::kDouble:
      return split_list<double>(text, flag).at(0);
    case Kind::kDoubles:
      return split_list<double>(text, flag);
    case Kind::kInts:
      return split_list<int>(text, flag);
    case Kind::kJson:
      try {
        return Json::parse(text);
      } catch (const nlohmann::json::exception&) {
        throw nclab::Error(nclab::ErrorKind::kInvalidInput, flag + " expects a JSON record");
      }
    case Kind::kString:
      return text;
  }
  return nullptr;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;  // flag -> raw text
  std::map<std::string, bool> switches;
  std::string config;
  std::string output;
  bool table = false;
  std::vector<std::string> overrides;
  std::string slot_switch;
};

std::filesystem::path output_path(const std::string& command, const std::string& requested) {
  const char* dir = std::getenv("NCLAB_OUTPUT_DIR");
  if (!requested.empty()) {
    std::filesystem::path p(requested);
    if (p.is_relative() && dir != nullptr && *dir != '\0') return std::filesystem::path(dir) / p;
    return p;
  }
  if (dir != nullptr && *dir != '\0') return std::filesystem::path(dir) / (command + ".jsonl");
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral triples on truncated AF-algebras: distances, isometries, crossed-product lifts"};
  app.require_subcommand(1);
  std::map<std::string, Subcommand> subs;
  for (const auto& name : nclab::command_names()) {
    Subcommand& s = subs[name];
    s.app = app.add_subcommand(name);
    s.app->add_option("--config", s.config, "JSON config file; flags override its fields");
    s.app->add_option("--output", s.output, "write records to this file");
    s.app->add_flag("--table", s.table, "print a table instead of records on stdout");
    s.app->add_option("--set", s.overrides, "override a config field: key=<json>");
    for (const auto& spec : flag_table()) {
      if (!spec.commands.empty() &&
          std::find(spec.commands.begin(), spec.commands.end(), name) == spec.commands.end()) {
        continue;
      }
      if (spec.kind == Kind::kFlag) {
        s.app->add_flag(spec.flag, s.switches[spec.flag], spec.help);
      } else {
        s.app->add_option(spec.flag, s.values[spec.flag], spec.help);
      }
    }
    if (name == "iso-check") {
      s.app->add_option("--switch", s.slot_switch, "swap two tensor slots, 1-based: i,j");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Subcommand& s = subs.at(command);
  nclab::ExperimentConfig config;
  try {
    Json j = Json::object();
    if (!s.config.empty()) {
      std::ifstream in(s.config);
      if (!in) throw nclab::Error(nclab::ErrorKind::kInvalidInput, "cannot read config " + s.config);
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw nclab::Error(nclab::ErrorKind::kInvalidInput, "config is not valid JSON: " + std::string(e.what()));
      }
    }
    j["command"] = command;
    for (const auto& spec : flag_table()) {
      if (spec.kind == Kind::kFlag) {
        auto it = s.switches.find(spec.flag);
        if (it != s.switches.end() && it->second) j[spec.key] = true;
      } else if (s.values.contains(spec.flag) && s.app->count(spec.flag) > 0) {
        j[spec.key] = flag_value(spec, s.values.at(spec.flag));
      }
    }
    if (!s.slot_switch.empty()) {
      const auto ij = split_list<int>(s.slot_switch, "--switch");
      if (ij.size() != 2) throw nclab::Error(nclab::ErrorKind::kInvalidInput, "--switch expects i,j");
      const int depth = j.contains("depth") ? j["depth"].get<int>() : 3;
      std::vector<int> perm(depth);
      for (int i = 0; i < depth; ++i) perm[i] = i;
      if (ij[0] < 1 || ij[1] < 1 || ij[0] > depth || ij[1] > depth) {
        throw nclab::Error(nclab::ErrorKind::kInvalidInput, "--switch slots must lie in 1..depth");
      }
      std::swap(perm[ij[0] - 1], perm[ij[1] - 1]);
      j["automorphism"] = {{"kind", "uhf"}, {"permutation", perm}};
    }
    for (const auto& o : s.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw nclab::Error(nclab::ErrorKind::kInvalidInput, "--set expects key=<json>");
      try {
        j[o.substr(0, eq)] = Json::parse(o.substr(eq + 1));
      } catch (const nlohmann::json::exception&) {
        throw nclab::Error(nclab::ErrorKind::kInvalidInput, "--set value for '" + o.substr(0, eq) + "' is not JSON");
      }
    }
    if (s.output.size()) j["output"] = s.output;
    if (s.table) j["table"] = true;
    config = nclab::config_from_json(j);
    if (command == "iso-enumerate" && !config.cantor && !config.filtration) {
      throw nclab::Error(nclab::ErrorKind::kInvalidInput, "iso-enumerate needs --cantor");
    }
  } catch (const nclab::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  nclab::RunResult result;
  try {
    result = nclab::run(config, [](std::uint64_t done, std::uint64_t total) {
      std::cerr << "progress " << done << '/' << total << '\n';
    });
  } catch (const nclab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const auto path = output_path(command, config.output);
  if (!path.empty()) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    for (const auto& r : result.records) out << r.dump() << '\n';
  }
  if (config.table) {
    std::cout << nclab::render_table(result.records);
  } else {
    for (const auto& r : result.records) std::cout << r.dump() << '\n';
  }
  if (!result.passed) {
    for (const auto& r : result.records) {
      if (!r.at("pass").get<bool>()) std::cerr << "failed: " << r.dump() << '\n';
    }
    return 1;
  }
  return 0;
}
