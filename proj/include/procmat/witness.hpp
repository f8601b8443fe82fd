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

#ifndef PROCMAT_WITNESS_HPP
#define PROCMAT_WITNESS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procmat/process.hpp"
#include "procmat/structure.hpp"

namespace procmat {

/// Negativity above this value on the unit-trace operator counts as a
/// quantum-memory witness (two orders above eigensolver noise at d <= 64).
inline constexpr double kNegativityThreshold = 1e-7;

struct ClassificationReport {
  double markov_residual = 0.0;
  std::optional<double> decomposition_residual;
  /// keyed by a printable cut description, e.g. "A_I.1|rest"
  std::map<std::string, double> negativities;
  bool markovian = false;
  bool mixed_unitary_certified = false;
  bool quantum_memory_witnessed = false;
  /// PPT is one-sided: zero negativity never certifies classical memory.
  std::string caveat =
      "negativity 0 does not certify classical memory (PPT is one-sided)";
};

/// Unit-trace rescaling for entanglement analysis.
LabeledOperator normalize_process(const ProcessMatrix& w);

/// Sum of |negative eigenvalues| of the partial transpose of the normalized
/// process over the first part of the bipartition.
double negativity(const ProcessMatrix& w,
                  const std::vector<std::string>& first_part);

/// Frobenius distance of the normalized process from the tensor product of
/// its unit-trace site-group marginals; zero exactly characterizes the
/// Markov product form.
double markov_residual(const ProcessMatrix& w);

double decomposition_residual(const ProcessMatrix& w,
                         const MixedUnitaryDecomposition& decomp);

/// Default bipartitions: A_I.1 | rest, plus every temporal cut whose first
/// part runs through the k-th site input (so no link factor is split).
std::vector<std::pair<std::string, std::vector<std::string>>>
default_cuts(const ProcessMatrix& w);

ClassificationReport classify(const ProcessMatrix& w,
                              const MixedUnitaryDecomposition* decomp = nullptr);

} // namespace procmat

#endif
