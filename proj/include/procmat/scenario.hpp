// Copyright 2026 The procmat authors
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

#ifndef PROCMAT_SCENARIO_HPP
#define PROCMAT_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "procmat/dynamics.hpp"
#include "procmat/process.hpp"

namespace procmat {

/// Declarative experiment file: wires, Hamiltonian, initial state, probe
/// times and a list of analyses.  The raw JSON document is kept so sweeps can
/// rebind scalar fields by JSON pointer and re-parse.
struct Scenario {
  nlohmann::json doc;
  std::uint64_t seed = 0;
  HamiltonianSpec hamiltonian;
  LabeledOperator initial_state; // on system wires ++ env wires
  ProbeTimes probes;
  int slices = 256;

  std::vector<nlohmann::json> analyses;
};

Scenario parse_scenario(const std::string& text);
Scenario parse_scenario_json(const nlohmann::json& doc);

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  double negativity = 0.0;
  std::string cut;
};

struct ResultBundle {
  nlohmann::json report; // {"schema_version":1,"analyses":[...]}
  std::vector<SweepRow> sweep_rows;
};

/// Execute every analysis in order.  Deterministic for a fixed seed: all
/// random draws come from one generator seeded from the scenario.
ResultBundle run_scenario(const Scenario& sc, int jobs = 1);

/// Same, restricted to a single named analysis (for the `sweep` verb).
ResultBundle run_scenario_analysis(const Scenario& sc, const std::string& name,
                                   int jobs = 1);

/// `parameter,value,negativity,cut` with %.12e values, LF line endings.
std::string emit_csv(const ResultBundle& results);
std::string emit_json(const ResultBundle& results);

/// Full command-line front end; returns the process exit code
/// (0 success, 2 validation error, 3 numerical failure).
int run_cli(int argc, const char* const* argv);

} // namespace procmat

#endif
