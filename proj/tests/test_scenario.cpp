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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "procmat/scenario.hpp"
#include "test_helpers.hpp"

using namespace procmat;
using nlohmann::json;

namespace {

const double kPi = 3.14159265358979323846;

std::string exchange_scenario(double t, const std::string& analyses) {
  std::ostringstream os;
  os << R"({
    "schema_version": 1,
    "seed": 7,
    "system_wires": [{"label": "A", "dim": 2}],
    "env_wires": [{"label": "B", "dim": 2}],
    "hamiltonian": {"type": "constant",
                    "h": {"builtin": "heisenberg", "params": {"J": 1.0, "B": 0.5}}},
    "initial_state": {"type": "bell"},
    "probe_times": [0.0, )"
     << t << R"(],
    "analyses": )"
     << analyses << "}";
  return os.str();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

} // namespace

TEST_CASE("scenario parsing fills defaults and fields") {
  Scenario sc = parse_scenario(exchange_scenario(1.0, "[{\"type\": \"classify\"}]"));
  CHECK(sc.seed == 7);
  CHECK(sc.slices == 256);
  CHECK(sc.probes.times == std::vector<double>{0.0, 1.0});
  CHECK(sc.hamiltonian.system_dim() == 2);
  CHECK(sc.hamiltonian.env_dim() == 2);
  CHECK((sc.hamiltonian.at(0.0).matrix() - procmat::testing::heisenberg(1.0, 0.5))
            .norm() < 1e-12);
  CHECK(sc.initial_state.trace().real() == doctest::Approx(1.0));
  REQUIRE(sc.analyses.size() == 1);
}

TEST_CASE("schema errors carry JSON-pointer style paths") {
  auto message_of = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const SchemaError& e) {
      return std::string(e.what());
    }
    return std::string("<no error>");
  };
  CHECK(message_of("{\"schema_version\": 2}").find("/schema_version") !=
        std::string::npos);
  CHECK(message_of("{\"schema_version\": 1}").find("/system_wires") !=
        std::string::npos);
  CHECK(message_of("not json at all").find("not valid JSON") != std::string::npos);
  std::string bad_dim = R"({"schema_version": 1,
    "system_wires": [{"label": "A", "dim": 0}]})";
  CHECK(message_of(bad_dim).find("/system_wires/0/dim") != std::string::npos);
}

TEST_CASE("classify analysis reports Markovianity of trivial dynamics") {
  std::string text = R"({
    "schema_version": 1,
    "system_wires": [{"label": "A", "dim": 2}],
    "env_wires": [{"label": "B", "dim": 2}],
    "hamiltonian": {"type": "constant",
                    "h": {"builtin": "pauli_product",
                          "params": {"factors": "II", "scale": 0.0}}},
    "initial_state": {"type": "bell"},
    "probe_times": [0.0, 1.0, 2.0],
    "analyses": [{"type": "classify"}]
  })";
  ResultBundle res = run_scenario(parse_scenario(text));
  const json& a = res.report.at("analyses").at(0);
  CHECK(a.at("type") == "classify");
  CHECK(a.at("markovian").get<bool>());
  CHECK_FALSE(a.at("quantum_memory_witnessed").get<bool>());
  for (const auto& [cut, neg] : a.at("negativities").items())
    CHECK(neg.get<double>() < 1e-9);
}

TEST_CASE("classify analysis witnesses the entangling exchange point") {
  ResultBundle res = run_scenario(
      parse_scenario(exchange_scenario(kPi / 4, "[{\"type\": \"classify\"}]")));
  const json& a = res.report.at("analyses").at(0);
  CHECK(a.at("quantum_memory_witnessed").get<bool>());
  CHECK(a.at("negativities").at("A_I.1|rest").get<double>() ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("born analysis matches the library Born rule") {
  std::string analyses = R"([{"type": "born",
    "ops": [{"unitary": [[1, 0], [0, 1]]},
            {"effect": [[1, 0], [0, 0]]}]}])";
  ResultBundle res =
      run_scenario(parse_scenario(exchange_scenario(2.0 * kPi, analyses)));
  // a full exchange period is the identity on the system; reading |0> after
  // feeding through half of a Bell pair gives 1/2
  CHECK(res.report.at("analyses").at(0).at("probability").get<double>() ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("certificate and dilate analyses on a commuting interaction") {
  std::string text = R"({
    "schema_version": 1,
    "seed": 11,
    "system_wires": [{"label": "A", "dim": 2}],
    "env_wires": [{"label": "B", "dim": 2}],
    "hamiltonian": {"type": "constant",
                    "h": {"builtin": "pauli_product",
                          "params": {"factors": "ZZ", "scale": 0.7}}},
    "initial_state": {"type": "product",
                      "system": [[0.5, 0.5], [0.5, 0.5]],
                      "env": [[0.5, 0.5], [0.5, 0.5]]},
    "probe_times": [0.0, 0.9],
    "analyses": [{"type": "certificate"}, {"type": "dilate"}]
  })";
  ResultBundle res = run_scenario(parse_scenario(text));
  const json& cert = res.report.at("analyses").at(0);
  CHECK(cert.at("holds").get<bool>());
  const json& dil = res.report.at("analyses").at(1);
  CHECK(dil.at("branches").get<int>() == 2);
  CHECK(dil.at("decomposition_residual").get<double>() < 1e-8);
  CHECK(dil.at("circuit_residual").get<double>() < 1e-8);
}

TEST_CASE("negativity sweep emits rows and is deterministic") {
  std::string analyses = R"([{"type": "negativity_sweep",
    "name": "scan",
    "parameter": "/probe_times/1",
    "start": 0.0, "stop": 3.141592653589793, "count": 7,
    "include_start": false,
    "cut": ["A_I.1"], "cut_name": "first|rest"}])";
  Scenario sc = parse_scenario(exchange_scenario(1.0, analyses));

  ResultBundle res = run_scenario(sc);
  REQUIRE(res.sweep_rows.size() == 7);
  for (const auto& row : res.sweep_rows) {
    CHECK(row.parameter == "/probe_times/1");
    CHECK(row.cut == "first|rest");
  }
  // grid point 4 sits at 4 pi / 7; cross-check one value against the library
  CHECK(res.sweep_rows[3].value == doctest::Approx(4.0 * kPi / 7).epsilon(1e-12));

  SUBCASE("identical CSV on repeated and threaded runs") {
    std::string csv1 = emit_csv(res);
    std::string csv2 = emit_csv(run_scenario(sc));
    std::string csv4 = emit_csv(run_scenario(sc, 4));
    CHECK(csv1 == csv2);
    CHECK(csv1 == csv4);
  }

  SUBCASE("CSV format: header, %.12e fields, LF endings") {
    std::string csv = emit_csv(res);
    CHECK(csv.rfind("parameter,value,negativity,cut\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line); // header
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      CHECK((line.find("e+") != std::string::npos ||
             line.find("e-") != std::string::npos));
      CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(rows == 7);
  }

  SUBCASE("the sweep verb runs one named analysis") {
    ResultBundle named = run_scenario_analysis(sc, "scan");
    CHECK(emit_csv(named) == emit_csv(res));
    CHECK_THROWS_AS(run_scenario_analysis(sc, "absent"), ValidationError);
  }
}

TEST_CASE("shipped scenario files parse and validate") {
  std::filesystem::path dir(PROCMAT_SCENARIO_DIR);
  REQUIRE(std::filesystem::is_directory(dir));
  std::size_t found = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++found;
    INFO("scenario ", entry.path().string());
    CHECK_NOTHROW(parse_scenario(read_file(entry.path())));
  }
  CHECK(found >= 6);
}

TEST_CASE("command-line front end") {
  std::filesystem::path dir(PROCMAT_SCENARIO_DIR);
  std::string minimal = (dir / "minimal.json").string();

  SUBCASE("validate returns success on a good file") {
    const char* argv[] = {"procmat", "validate", minimal.c_str()};
    CHECK(run_cli(3, argv) == 0);
  }
  SUBCASE("validate rejects a malformed file with exit code 2") {
    std::filesystem::path bad =
        std::filesystem::temp_directory_path() / "procmat_bad_scenario.json";
    std::ofstream(bad) << "{\"schema_version\": 1}";
    std::string bad_str = bad.string();
    const char* argv[] = {"procmat", "validate", bad_str.c_str()};
    CHECK(run_cli(3, argv) == 2);
  }
  SUBCASE("missing file is a runtime failure, exit code 3") {
    const char* argv[] = {"procmat", "validate", "/nonexistent/path.json"};
    CHECK(run_cli(3, argv) == 3);
  }
  SUBCASE("run writes a JSON report to --out") {
    std::filesystem::path out =
        std::filesystem::temp_directory_path() / "procmat_report.json";
    std::string out_str = out.string();
    const char* argv[] = {"procmat", "run",    minimal.c_str(),
                          "--out",   out_str.c_str(), "--format", "json"};
    CHECK(run_cli(7, argv) == 0);
    json report = json::parse(read_file(out));
    CHECK(report.at("schema_version") == 1);
    CHECK(report.at("analyses").is_array());
  }
}
