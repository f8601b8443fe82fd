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

#ifndef PROCMAT_DYNAMICS_HPP
#define PROCMAT_DYNAMICS_HPP

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "procmat/labeled_operator.hpp"

namespace procmat {

/// Time-independent Hamiltonian.
struct ConstantH {
  LabeledOperator h;
};

/// Contiguous, non-overlapping segments, each with a constant Hamiltonian.
struct PiecewiseConstantH {
  struct Segment {
    double t_start;
    double t_end;
    LabeledOperator h;
  };
  std::vector<Segment> segments;
};

/// Delta pulses exp(-i Hbar) at fixed times, optionally riding on a constant
/// base Hamiltonian.  Pulses are first-class, not narrow-Gaussian limits.
struct PulseTrainH {
  std::optional<LabeledOperator> base;
  std::vector<std::pair<double, LabeledOperator>> pulses; // (t*, Hbar)
};

/// H(t) = sum_j f_j(t) S_j (x) E_j with scalar schedules sampled on the
/// propagator grid.
struct ProductTermsH {
  struct Term {
    std::function<double(double)> schedule;
    LabeledOperator sys;
    LabeledOperator env;
  };
  std::vector<Term> terms;
};

/// Declarative time-dependent system-environment Hamiltonian.  All operator
/// values live on system_wires ++ env_wires (any wire order; they are aligned
/// internally with system wires leftmost).
struct HamiltonianSpec {
  std::vector<Wire> system_wires;
  std::vector<Wire> env_wires;
  std::variant<ConstantH, PiecewiseConstantH, PulseTrainH, ProductTermsH> term;

  Eigen::Index system_dim() const;
  Eigen::Index env_dim() const;
  std::vector<Wire> joint_wires() const;
  void validate() const;

  /// Matrix of H at time t, wires ordered system ++ environment.
  LabeledOperator at(double t) const;
  /// Representative snapshots of H covering the whole time dependence
  /// (segment values, base + pulse generators, or schedule samples).
  std::vector<LabeledOperator> snapshots(int samples_per_term = 64,
                                         double t0 = 0.0, double t1 = 1.0) const;
};

struct ProbeTimes {
  std::vector<double> times;

  void validate() const; // strictly increasing, N >= 2
  int sites() const { return static_cast<int>(times.size()); }
};

/// exp(-i H tau) via eigendecomposition.
LabeledOperator expm_hermitian(const LabeledOperator& h, double tau);

/// Time-ordered propagator over [t0, t1].  Exact for Constant, Piecewise-
/// Constant and PulseTrain; midpoint-rule slicing (O(dt^2)) for ProductTerms.
LabeledOperator propagator(const HamiltonianSpec& spec, double t0, double t1,
                           int slices = 256);

/// The N-1 inter-probe unitaries U^1 ... U^{N-1}, each on system (x) env.
std::vector<LabeledOperator> segment_unitaries(const HamiltonianSpec& spec,
                                               const ProbeTimes& probes,
                                               int slices_per_segment = 256);

} // namespace procmat

#endif
