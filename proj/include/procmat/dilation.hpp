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

#ifndef PROCMAT_DILATION_HPP
#define PROCMAT_DILATION_HPP

#include <vector>

#include "procmat/choi.hpp"
#include "procmat/process.hpp"
#include "procmat/structure.hpp"

namespace procmat {

/// Circuit model of a process: an initial joint state, one gate per step on
/// the same wires, and the environment wires discarded at the end.
struct DilatedCircuit {
  LabeledOperator initial_state; // on system wire ++ env wires
  std::vector<LabeledOperator> gates;
  std::vector<Wire> system_wires;
  std::vector<Wire> env_wires;
};

/// sum_nu U_nu (x) |nu><nu| on system (x) control wire.
LabeledOperator assemble_controlled(const std::vector<LabeledOperator>& branches,
                                    const Matrix& basis,
                                    const std::vector<Wire>& system_wires,
                                    const Wire& env_wire);

/// Controlled-unitary dilation of a mixed-unitary process: quantum-classical
/// initial state sum_nu p(nu) rho_nu (x) |nu><nu| and one controlled gate per
/// step, all in the same control basis.
DilatedCircuit dilate_mixed_unitary(const MixedUnitaryDecomposition& decomp);

ProcessMatrix simulate_circuit(const DilatedCircuit& circuit);

/// Unitary dilation of an instrument: an ancilla of dimension
/// (outcomes x kraus slots), initialized to |0>, with the degenerate
/// measurement 1 (x) |m><m| recovering each branch.
struct InstrumentDilation {
  LabeledOperator unitary; // on ancilla (x) system
  Wire ancilla;
  Wire system;
  int outcomes = 0;
  int kraus_slots = 0; // ancilla index a = m * kraus_slots + k

  int outcome_of(Eigen::Index ancilla_index) const {
    return static_cast<int>(ancilla_index / kraus_slots);
  }
};

InstrumentDilation instrument_dilation(const Instrument& instrument,
                                       int min_kraus_slots = 1);

/// Extend an isometry (orthonormal columns) to a full unitary by
/// orthonormalizing canonical basis vectors against the existing columns.
Matrix complete_isometry(const Matrix& isometry);

/// R_a = |xi><0| + sum_i |xi_perp^i><i| with |xi> = sum_i sqrt(p_i) |s_i>;
/// applying it to |0> and measuring in {|s_i>} samples the distribution.
LabeledOperator stochastic_control(const std::vector<double>& distribution,
                                   const Matrix& basis, const Wire& wire);

/// Full circuit model of a classical-memory process: per-step stochastic
/// draws into setting registers, instrument dilations controlled on them,
/// all registers traced at the end.
ProcessMatrix classical_memory_circuit_process(const ClassicalMemorySpec& spec);

} // namespace procmat

#endif
