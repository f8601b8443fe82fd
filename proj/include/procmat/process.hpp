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

#ifndef PROCMAT_PROCESS_HPP
#define PROCMAT_PROCESS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "procmat/choi.hpp"
#include "procmat/dynamics.hpp"
#include "procmat/labeled_operator.hpp"

namespace procmat {

/// Wire naming used by every builder: site n has input wire "A_I.n" and
/// (except the last site) output wire "A_O.n"; internal environment wires are
/// "E.n" or "E.n.<orig>" and never appear in a finished process matrix.
std::string input_label(int site);
std::string output_label(int site);
std::string env_label(int step, const std::string& orig);

/// Positive operator over A_I.1, A_O.1, ..., A_I.N with trace equal to the
/// product of the output dimensions.
class ProcessMatrix {
public:
  ProcessMatrix(LabeledOperator op, int n_sites,
                std::optional<ProbeTimes> probe_times = std::nullopt,
                std::string provenance = {});

  const LabeledOperator& op() const { return op_; }
  int sites() const { return n_sites_; }
  const std::optional<ProbeTimes>& probe_times() const { return probe_times_; }
  const std::string& provenance() const { return provenance_; }

  /// Labels of the input (and, when present, output) wire of one site.
  std::vector<std::string> site_labels(int site) const;
  std::vector<std::string> all_labels() const { return op_.labels(); }
  Eigen::Index output_dims_product() const;

private:
  LabeledOperator op_;
  int n_sites_;
  std::optional<ProbeTimes> probe_times_;
  std::string provenance_;
};

/// Dynamics chain: initial system-environment state linked through the
/// segment unitaries, final environment traced out.  rho_init lives on the
/// system wires followed by the environment wires of the unitaries.
ProcessMatrix build_from_dynamics(const LabeledOperator& rho_init,
                                  const std::vector<LabeledOperator>& unitaries,
                                  const std::vector<Wire>& system_wires,
                                  const std::vector<Wire>& env_wires,
                                  std::optional<ProbeTimes> probe_times = std::nullopt);

/// Convenience overload taking a Hamiltonian spec.
ProcessMatrix build_from_dynamics(const LabeledOperator& rho_init,
                                  const HamiltonianSpec& spec,
                                  const ProbeTimes& probes,
                                  int slices_per_segment = 256);

ProcessMatrix build_markov(const LabeledOperator& rho,
                           const std::vector<ChoiOperator>& channels);

ProcessMatrix build_unitary_markov(const LabeledOperator& rho,
                                   const std::vector<LabeledOperator>& unitaries);

ProcessMatrix build_ccc(const std::vector<double>& weights,
                        const std::vector<LabeledOperator>& states,
                        const std::vector<std::vector<ChoiOperator>>& channels);

/// Classical-memory process: initial states selected by s_0, per-step
/// instruments selected by settings s_n whose distribution may depend on all
/// previous settings and measurement outcomes.
struct ClassicalMemorySpec {
  std::vector<double> p0;                       // p(s_0)
  std::vector<LabeledOperator> initial_states;  // rho_{s_0}, one per s_0 value
  /// conditionals[n-1](s_hist = {s_0..s_{n-1}}, m_hist = {m_1..m_{n-1}})
  /// -> distribution over s_n, for steps n = 1..N-1.
  std::vector<std::function<std::vector<double>(const std::vector<int>&,
                                                const std::vector<int>&)>>
      conditionals;
  /// instruments[n-1][s_n] is the instrument applied at step n under setting
  /// s_n.  All instruments of one step must share the same outcome count.
  std::vector<std::vector<Instrument>> instruments;

  int sites() const { return static_cast<int>(instruments.size()) + 1; }
  void validate() const;
};

ProcessMatrix build_classical_memory(const ClassicalMemorySpec& spec);

} // namespace procmat

#endif
