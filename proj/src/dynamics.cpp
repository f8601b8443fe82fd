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

#include "procmat/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace procmat {

namespace {

const Complex kImag(0.0, 1.0);

LabeledOperator align(const LabeledOperator& h, const HamiltonianSpec& spec) {
  std::vector<std::string> order;
  for (const auto& w : spec.system_wires) order.push_back(w.label);
  for (const auto& w : spec.env_wires) order.push_back(w.label);
  return permute_wires(h, order);
}

void check_hermitian(const LabeledOperator& h, const char* what) {
  if (!h.is_hermitian(tol().herm))
    throw NotHermitianError(std::string(what) + ": operator is not Hermitian");
}

} // namespace

Eigen::Index HamiltonianSpec::system_dim() const {
  Eigen::Index d = 1;
  for (const auto& w : system_wires) d *= w.dim;
  return d;
}

Eigen::Index HamiltonianSpec::env_dim() const {
  Eigen::Index d = 1;
  for (const auto& w : env_wires) d *= w.dim;
  return d;
}

std::vector<Wire> HamiltonianSpec::joint_wires() const {
  std::vector<Wire> ws = system_wires;
  ws.insert(ws.end(), env_wires.begin(), env_wires.end());
  return ws;
}

void HamiltonianSpec::validate() const {
  if (system_wires.empty() || env_wires.empty())
    throw ValidationError("HamiltonianSpec: system and environment wires required");
  if (std::holds_alternative<ConstantH>(term)) {
    check_hermitian(std::get<ConstantH>(term).h, "HamiltonianSpec");
  } else if (std::holds_alternative<PiecewiseConstantH>(term)) {
    const auto& pw = std::get<PiecewiseConstantH>(term);
    if (pw.segments.empty()) throw ValidationError("piecewise spec has no segments");
    for (std::size_t i = 0; i < pw.segments.size(); ++i) {
      const auto& s = pw.segments[i];
      if (!(s.t_start < s.t_end))
        throw ValidationError("piecewise segment has non-positive duration");
      if (i > 0 && std::abs(pw.segments[i - 1].t_end - s.t_start) > 1e-12)
        throw ValidationError("piecewise segments must be contiguous");
      check_hermitian(s.h, "HamiltonianSpec");
    }
  } else if (std::holds_alternative<PulseTrainH>(term)) {
    const auto& pt = std::get<PulseTrainH>(term);
    if (pt.base) check_hermitian(*pt.base, "HamiltonianSpec");
    for (std::size_t i = 0; i < pt.pulses.size(); ++i) {
      check_hermitian(pt.pulses[i].second, "HamiltonianSpec");
      if (i > 0 && !(pt.pulses[i - 1].first < pt.pulses[i].first))
        throw ValidationError("pulse times must be strictly increasing");
    }
  } else {
    for (const auto& t : std::get<ProductTermsH>(term).terms) {
      check_hermitian(t.sys, "HamiltonianSpec");
      check_hermitian(t.env, "HamiltonianSpec");
    }
  }
}

LabeledOperator HamiltonianSpec::at(double t) const {
  if (std::holds_alternative<ConstantH>(term))
    return align(std::get<ConstantH>(term).h, *this);
  if (std::holds_alternative<PiecewiseConstantH>(term)) {
    const auto& pw = std::get<PiecewiseConstantH>(term);
    for (const auto& s : pw.segments)
      if (t >= s.t_start && t <= s.t_end) return align(s.h, *this);
    throw InvalidIntervalError("time " + std::to_string(t) + " outside schedule");
  }
  if (std::holds_alternative<PulseTrainH>(term)) {
    const auto& pt = std::get<PulseTrainH>(term);
    if (pt.base) return align(*pt.base, *this);
    return LabeledOperator(joint_wires(),
                           Matrix::Zero(system_dim() * env_dim(),
                                        system_dim() * env_dim()));
  }
  const auto& terms = std::get<ProductTermsH>(term).terms;
  Eigen::Index d = system_dim() * env_dim();
  LabeledOperator sum(joint_wires(), Matrix::Zero(d, d));
  for (const auto& tm : terms) {
    LabeledOperator prod = align(tensor(tm.sys, tm.env), *this);
    sum = sum + prod.scaled(tm.schedule(t));
  }
  return sum;
}

std::vector<LabeledOperator> HamiltonianSpec::snapshots(int samples_per_term,
                                                        double t0, double t1) const {
  std::vector<LabeledOperator> out;
  if (std::holds_alternative<ConstantH>(term)) {
    out.push_back(align(std::get<ConstantH>(term).h, *this));
  } else if (std::holds_alternative<PiecewiseConstantH>(term)) {
    for (const auto& s : std::get<PiecewiseConstantH>(term).segments)
      out.push_back(align(s.h, *this));
  } else if (std::holds_alternative<PulseTrainH>(term)) {
    const auto& pt = std::get<PulseTrainH>(term);
    if (pt.base) out.push_back(align(*pt.base, *this));
    for (const auto& [t, h] : pt.pulses) out.push_back(align(h, *this));
  } else {
    for (int k = 0; k < samples_per_term; ++k) {
      double t = t0 + (t1 - t0) * (k + 0.5) / samples_per_term;
      out.push_back(at(t));
    }
  }
  return out;
}

void ProbeTimes::validate() const {
  if (times.size() < 2) throw ValidationError("ProbeTimes: need at least two times");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i - 1] < times[i]))
      throw ValidationError("ProbeTimes: times must be strictly increasing");
}

LabeledOperator expm_hermitian(const LabeledOperator& h, double tau) {
  EigenSystem es = hermitian_eigen(h); // throws NotHermitian
  Vector phases(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    phases(k) = std::exp(-kImag * es.values(k) * tau);
  Matrix u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
  return LabeledOperator(h.wires(), std::move(u));
}

namespace {

LabeledOperator propagate_piecewise(const PiecewiseConstantH& pw,
                                    const HamiltonianSpec& spec, double t0,
                                    double t1) {
  if (t0 < pw.segments.front().t_start - 1e-12 ||
      t1 > pw.segments.back().t_end + 1e-12)
    throw InvalidIntervalError("propagator window outside the schedule");
  LabeledOperator u = LabeledOperator::identity(spec.joint_wires());
  for (const auto& s : pw.segments) {
    double a = std::max(t0, s.t_start), b = std::min(t1, s.t_end);
    if (b - a <= 1e-15) continue;
    u = expm_hermitian(align(s.h, spec), b - a) * u;
  }
  return u;
}

LabeledOperator propagate_pulses(const PulseTrainH& pt, const HamiltonianSpec& spec,
                                 double t0, double t1) {
  LabeledOperator u = LabeledOperator::identity(spec.joint_wires());
  double cursor = t0;
  for (const auto& [tp, hbar] : pt.pulses) {
    if (tp <= t0 || tp > t1) continue;
    if (pt.base && tp > cursor)
      u = expm_hermitian(align(*pt.base, spec), tp - cursor) * u;
    u = expm_hermitian(align(hbar, spec), 1.0) * u;
    cursor = tp;
  }
  if (pt.base && t1 > cursor)
    u = expm_hermitian(align(*pt.base, spec), t1 - cursor) * u;
  return u;
}

LabeledOperator propagate_sliced(const HamiltonianSpec& spec, double t0, double t1,
                                 int slices) {
  if (slices < 1) throw InvalidIntervalError("propagator: slices must be positive");
  double dt = (t1 - t0) / slices;
  LabeledOperator u = LabeledOperator::identity(spec.joint_wires());
  for (int k = 0; k < slices; ++k) {
    double tm = t0 + (k + 0.5) * dt;
    u = expm_hermitian(spec.at(tm), dt) * u;
  }
  return u;
}

} // namespace

LabeledOperator propagator(const HamiltonianSpec& spec, double t0, double t1,
                           int slices) {
  if (!(t0 < t1)) throw InvalidIntervalError("propagator: t0 must precede t1");
  LabeledOperator u = std::visit(
      [&](const auto& term) -> LabeledOperator {
        using T = std::decay_t<decltype(term)>;
        if constexpr (std::is_same_v<T, ConstantH>)
          return expm_hermitian(align(term.h, spec), t1 - t0);
        else if constexpr (std::is_same_v<T, PiecewiseConstantH>)
          return propagate_piecewise(term, spec, t0, t1);
        else if constexpr (std::is_same_v<T, PulseTrainH>)
          return propagate_pulses(term, spec, t0, t1);
        else
          return propagate_sliced(spec, t0, t1, slices);
      },
      spec.term);
  if (!u.is_unitary(tol().unitary))
    throw NotUnitaryError("propagator: result failed the unitarity check");
  return u;
}

std::vector<LabeledOperator> segment_unitaries(const HamiltonianSpec& spec,
                                               const ProbeTimes& probes,
                                               int slices_per_segment) {
  probes.validate();
  std::vector<LabeledOperator> out;
  for (std::size_t n = 0; n + 1 < probes.times.size(); ++n)
    out.push_back(propagator(spec, probes.times[n], probes.times[n + 1],
                             slices_per_segment));
  return out;
}

} // namespace procmat
