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

#ifndef PROCMAT_CHOI_HPP
#define PROCMAT_CHOI_HPP

#include <string>
#include <utility>
#include <vector>

#include "procmat/labeled_operator.hpp"

namespace procmat {

/// Choi representation of a map.  The operator lives on in_wires ++ out_wires
/// (in that order); the map is CP iff the operator is PSD and trace-preserving
/// iff tracing out the output wires leaves the identity on the inputs.
struct ChoiOperator {
  LabeledOperator op;
  std::vector<std::string> in_wires;
  std::vector<std::string> out_wires;

  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;
  bool is_trace_preserving(double tolerance) const;
  bool is_positive(double floor) const;

  /// Apply the map to a state on the input wires; result on the output wires.
  LabeledOperator apply(const LabeledOperator& state) const;

  /// Rename in/out wires (same order), updating the underlying operator.
  ChoiOperator relabeled(const std::vector<std::string>& in,
                         const std::vector<std::string>& out) const;
};

/// Collection of CP branches summing to a CPTP map.
struct Instrument {
  std::vector<std::pair<std::string, ChoiOperator>> branches;

  void validate(double tolerance) const;
  ChoiOperator total() const;
};

/// |U>> = sum_i |i> (x) U|i> on in (x) out; the Choi operator is the rank-1
/// projector |U>><<U|.  Multi-wire inputs and outputs are supported.
ChoiOperator choi_of_unitary(const LabeledOperator& u, std::vector<Wire> in,
                             std::vector<Wire> out);

ChoiOperator choi_of_kraus(const std::vector<Matrix>& kraus, std::vector<Wire> in,
                           std::vector<Wire> out);

/// Kraus operators of a CP branch, from the eigendecomposition of its Choi
/// operator (eigenvalues above the cutoff kept).  Each matrix maps the input
/// space to the output space.
std::vector<Matrix> kraus_of_choi(const ChoiOperator& c, double cutoff = 1e-12);

/// Link product: partial transpose on the shared wires, multiply, trace them
/// out.  Operands are aligned by wire label; the result lives on the symmetric
/// difference of the wire sets.
LabeledOperator link_product(const LabeledOperator& p, const LabeledOperator& q);
LabeledOperator link_product(const ChoiOperator& p, const ChoiOperator& q);
LabeledOperator link_product(const LabeledOperator& p, const ChoiOperator& q);
LabeledOperator link_product(const ChoiOperator& p, const LabeledOperator& q);

class ProcessMatrix; // process.hpp

/// Generalised Born rule: Tr[(M_1 (x) ... (x) M_N)^T W].
double born_rule(const ProcessMatrix& w, const std::vector<ChoiOperator>& ops);

} // namespace procmat

#endif
