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

#ifndef PROCMAT_STRUCTURE_HPP
#define PROCMAT_STRUCTURE_HPP

#include <random>
#include <vector>

#include "procmat/dynamics.hpp"
#include "procmat/labeled_operator.hpp"

namespace procmat {

/// Environment blocks K_ij = (<i| (x) 1_E) H (|j> (x) 1_E), gathered over all
/// time segments of a spec.  K_ij^dag = K_ji, so the family is adjoint-closed.
struct EnvBlockFamily {
  Eigen::Index sys_dim = 0;
  Eigen::Index env_dim = 0;
  std::vector<Wire> env_wires;
  /// blocks[t][i * sys_dim + j] for snapshot t.
  std::vector<std::vector<Matrix>> blocks;

  std::vector<const Matrix*> flat() const;
};

struct CommuteCheck {
  bool commuting = false;
  double max_commutator = 0.0;
  /// Flat indices of the worst pair, with a printable description.
  int first = -1, second = -1;
  std::string worst_description;
};

struct SchmidtTerms {
  struct Term {
    double weight;
    LabeledOperator sys;
    LabeledOperator env;
  };
  std::vector<Term> terms; // descending weight
};

struct CommutingBlocksCertificate {
  bool holds = false;
  Matrix basis; // columns |nu>, valid when holds
  CommuteCheck evidence;
};

struct MixedUnitaryDecomposition {
  Matrix basis;                    // environment vectors |nu> as columns
  std::vector<int> basis_columns;  // surviving branch -> basis column
  std::vector<double> weights;     // p(nu)
  std::vector<LabeledOperator> states; // rho_nu on the system
  /// unitaries[nu][n] is the conditional system unitary for step n.
  std::vector<std::vector<LabeledOperator>> unitaries;
};

EnvBlockFamily env_blocks(const HamiltonianSpec& spec, int samples_per_term = 64,
                          double t0 = 0.0, double t1 = 1.0);

CommuteCheck commuting_family_check(const EnvBlockFamily& family, double tolerance);

/// Common eigenbasis of a commuting, adjoint-closed family.  Random Hermitian
/// combinations split the spectrum generically; degenerate leftovers are
/// refined by recursive diagonalization within eigenspaces.
Matrix simultaneous_eigenbasis(const EnvBlockFamily& family, std::mt19937_64& rng);

/// Operator Schmidt decomposition across the system|environment cut.
SchmidtTerms operator_schmidt(const LabeledOperator& h,
                              const std::vector<Wire>& system_wires,
                              const std::vector<Wire>& env_wires);

CommutingBlocksCertificate commuting_blocks_certificate(const HamiltonianSpec& spec,
                                         std::mt19937_64& rng,
                                         double tolerance = -1.0);

/// Conditional system Hamiltonian <nu|H(t)|nu>_E as a system-only spec.
HamiltonianSpec conditional_spec(const HamiltonianSpec& spec, const Vector& nu);

MixedUnitaryDecomposition mixed_unitary_components(const HamiltonianSpec& spec,
                                                   const ProbeTimes& probes,
                                                   const LabeledOperator& rho_init,
                                                   std::mt19937_64& rng,
                                                   int slices_per_segment = 256);

} // namespace procmat

#endif
