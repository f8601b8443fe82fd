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

#include "procmat/dilation.hpp"

#include <algorithm>
#include <cmath>

namespace procmat {

namespace {

/// Tensor with identities on the missing wires, then align to `full`.
LabeledOperator embed(const LabeledOperator& op, const std::vector<Wire>& full) {
  std::vector<Wire> missing;
  for (const auto& w : full)
    if (!op.has_wire(w.label)) missing.push_back(w);
  LabeledOperator wide = missing.empty() ? op : tensor(op, LabeledOperator::identity(missing));
  std::vector<std::string> order;
  for (const auto& w : full) order.push_back(w.label);
  return permute_wires(wide, order);
}

} // namespace

LabeledOperator assemble_controlled(const std::vector<LabeledOperator>& branches,
                                    const Matrix& basis,
                                    const std::vector<Wire>& system_wires,
                                    const Wire& env_wire) {
  const Eigen::Index de = env_wire.dim;
  if (basis.rows() != de || basis.cols() != de)
    throw IncompleteBasisError("assemble_controlled: basis must be square on the env wire");
  if ((basis.adjoint() * basis - Matrix::Identity(de, de)).norm() > 1e-9 * de)
    throw IncompleteBasisError("assemble_controlled: basis is not orthonormal/complete");
  if (static_cast<Eigen::Index>(branches.size()) != de)
    throw IncompleteBasisError("assemble_controlled: branch count != env dimension");
  Eigen::Index ds = 1;
  for (const auto& w : system_wires) ds *= w.dim;
  Matrix m = Matrix::Zero(ds * de, ds * de);
  for (Eigen::Index v = 0; v < de; ++v) {
    const LabeledOperator& u = branches[static_cast<std::size_t>(v)];
    if (u.dim() != ds)
      throw DimensionMismatchError("assemble_controlled: branch dimension mismatch");
    if (!u.is_unitary(tol().unitary))
      throw NotUnitaryError("assemble_controlled: branch is not unitary");
    Matrix proj = basis.col(v) * basis.col(v).adjoint();
    for (Eigen::Index i = 0; i < ds; ++i)
      for (Eigen::Index j = 0; j < ds; ++j)
        m.block(i * de, j * de, de, de) += u.matrix()(i, j) * proj;
  }
  std::vector<Wire> wires = system_wires;
  wires.push_back(env_wire);
  LabeledOperator out(std::move(wires), std::move(m));
  if (!out.is_unitary(tol().unitary))
    throw NotUnitaryError("assemble_controlled: assembled operator is not unitary");
  return out;
}

DilatedCircuit dilate_mixed_unitary(const MixedUnitaryDecomposition& decomp) {
  if (decomp.weights.empty() || decomp.states.empty() ||
      decomp.unitaries.size() != decomp.weights.size())
    throw InvalidDecompositionError("dilate_mixed_unitary: inconsistent decomposition");
  const Eigen::Index nb = static_cast<Eigen::Index>(decomp.weights.size());
  const Eigen::Index ds = decomp.states.front().dim();
  const std::size_t steps = decomp.unitaries.front().size();
  for (const auto& us : decomp.unitaries)
    if (us.size() != steps)
      throw InvalidDecompositionError("dilate_mixed_unitary: ragged step counts");

  Wire sys{"S", ds};
  Wire env{"Ectl", nb};
  // quantum-classical initial state: sum_nu p(nu) rho_nu (x) |nu><nu|
  Matrix init = Matrix::Zero(ds * nb, ds * nb);
  for (Eigen::Index v = 0; v < nb; ++v) {
    const Matrix& rho = decomp.states[static_cast<std::size_t>(v)].matrix();
    for (Eigen::Index i = 0; i < ds; ++i)
      for (Eigen::Index j = 0; j < ds; ++j)
        init(i * nb + v, j * nb + v) +=
            decomp.weights[static_cast<std::size_t>(v)] * rho(i, j);
  }
  DilatedCircuit circuit{LabeledOperator({sys, env}, std::move(init)), {}, {sys}, {env}};
  Matrix basis = Matrix::Identity(nb, nb);
  for (std::size_t n = 0; n < steps; ++n) {
    std::vector<LabeledOperator> branches;
    for (Eigen::Index v = 0; v < nb; ++v)
      branches.push_back(LabeledOperator(
          {sys}, decomp.unitaries[static_cast<std::size_t>(v)][n].matrix()));
    circuit.gates.push_back(assemble_controlled(branches, basis, {sys}, env));
  }
  return circuit;
}

ProcessMatrix simulate_circuit(const DilatedCircuit& circuit) {
  return build_from_dynamics(circuit.initial_state, circuit.gates,
                             circuit.system_wires, circuit.env_wires);
}

Matrix complete_isometry(const Matrix& isometry) {
  const Eigen::Index n = isometry.rows();
  const Eigen::Index m = isometry.cols();
  if (m > n) throw DimensionMismatchError("complete_isometry: more columns than rows");
  if ((isometry.adjoint() * isometry - Matrix::Identity(m, m)).norm() > 1e-8 * n)
    throw NotUnitaryError("complete_isometry: columns are not orthonormal");
  Matrix u(n, n);
  u.leftCols(m) = isometry;
  Eigen::Index filled = m;
  for (Eigen::Index cand = 0; cand < n && filled < n; ++cand) {
    Vector v = Vector::Zero(n);
    v(cand) = 1.0;
    for (Eigen::Index k = 0; k < filled; ++k)
      v -= u.col(k) * (u.col(k).adjoint() * v);
    double nv = v.norm();
    if (nv < 1e-8) continue; // near-dependent candidate
    // second orthogonalization pass for numerical cleanliness
    for (Eigen::Index k = 0; k < filled; ++k)
      v -= u.col(k) * (u.col(k).adjoint() * v);
    u.col(filled++) = v / v.norm();
  }
  if (filled != n)
    throw Error("complete_isometry: could not complete the basis");
  return u;
}

InstrumentDilation instrument_dilation(const Instrument& instrument,
                                       int min_kraus_slots) {
  instrument.validate(tol().tp);
  const ChoiOperator& first = instrument.branches.front().second;
  const Eigen::Index ds = first.in_dim();
  if (first.out_dim() != ds)
    throw InvalidInstrumentError("instrument_dilation: only square branch maps supported");
  std::vector<std::vector<Matrix>> kraus;
  int k_max = std::max(min_kraus_slots, 1);
  for (const auto& [name, c] : instrument.branches) {
    kraus.push_back(kraus_of_choi(c));
    k_max = std::max(k_max, static_cast<int>(kraus.back().size()));
  }
  const int outcomes = static_cast<int>(instrument.branches.size());
  const Eigen::Index da = static_cast<Eigen::Index>(outcomes) * k_max;

  // V = sum_{mk} |m k> (x) M_{mk}, columns indexed by the system input.
  Matrix v = Matrix::Zero(da * ds, ds);
  for (int m = 0; m < outcomes; ++m) {
    for (std::size_t k = 0; k < kraus[static_cast<std::size_t>(m)].size(); ++k) {
      Eigen::Index a = static_cast<Eigen::Index>(m) * k_max + static_cast<Eigen::Index>(k);
      const Matrix& mk = kraus[static_cast<std::size_t>(m)][k];
      for (Eigen::Index s = 0; s < ds; ++s)
        v.block(a * ds, s, ds, 1) += mk.col(s);
    }
  }
  Matrix u = complete_isometry(v);
  Wire ancilla{"anc", da};
  Wire system{"sys", ds};
  return InstrumentDilation{LabeledOperator({ancilla, system}, std::move(u)),
                            ancilla, system, outcomes, k_max};
}

LabeledOperator stochastic_control(const std::vector<double>& distribution,
                                   const Matrix& basis, const Wire& wire) {
  const Eigen::Index d = wire.dim;
  if (static_cast<Eigen::Index>(distribution.size()) != d)
    throw BadDistributionError("stochastic_control: distribution size != wire dim");
  double sum = 0.0;
  for (double p : distribution) {
    if (p < -1e-12) throw BadDistributionError("stochastic_control: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw BadDistributionError("stochastic_control: probabilities sum to " +
                               std::to_string(sum));
  if (basis.rows() != d || basis.cols() != d ||
      (basis.adjoint() * basis - Matrix::Identity(d, d)).norm() > 1e-9 * d)
    throw BadDistributionError("stochastic_control: basis is not orthonormal");
  Vector xi = Vector::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i)
    xi += std::sqrt(std::max(0.0, distribution[static_cast<std::size_t>(i)])) *
          basis.col(i);
  Matrix r = complete_isometry(xi);
  return LabeledOperator({wire}, std::move(r));
}

namespace {

struct Registers {
  std::vector<Wire> env_wires; // C.0, then per step: C.n, D.n
  std::vector<int> k_slots;    // kraus slots per step (1-based step -> [n-1])
};

std::string setting_label(int n) { return "C." + std::to_string(n); }
std::string outcome_label(int n) { return "D." + std::to_string(n); }

} // namespace

ProcessMatrix classical_memory_circuit_process(const ClassicalMemorySpec& spec) {
  spec.validate();
  const Eigen::Index ds = spec.initial_states.front().dim();
  const int steps = static_cast<int>(spec.instruments.size());
  Wire sys{"S", ds};

  // Dilate every instrument first; settings of one step share ancilla shape.
  std::vector<std::vector<InstrumentDilation>> dilations(
      static_cast<std::size_t>(steps));
  Registers regs;
  regs.env_wires.push_back({setting_label(0), static_cast<Eigen::Index>(spec.p0.size())});
  for (int n = 1; n <= steps; ++n) {
    const auto& step = spec.instruments[static_cast<std::size_t>(n - 1)];
    int k_max = 1;
    for (const auto& ins : step) {
      for (const auto& [name, c] : ins.branches)
        k_max = std::max(k_max, static_cast<int>(kraus_of_choi(c).size()));
    }
    regs.k_slots.push_back(k_max);
    for (const auto& ins : step)
      dilations[static_cast<std::size_t>(n - 1)].push_back(
          instrument_dilation(ins, k_max));
    regs.env_wires.push_back({setting_label(n),
                              static_cast<Eigen::Index>(step.size())});
    regs.env_wires.push_back(
        {outcome_label(n),
         dilations[static_cast<std::size_t>(n - 1)].front().ancilla.dim});
  }

  std::vector<Wire> full = {sys};
  full.insert(full.end(), regs.env_wires.begin(), regs.env_wires.end());

  // initial state: sum_{s0} p(s0) rho_{s0} (x) |s0><s0| (x) |0><0| elsewhere
  std::optional<LabeledOperator> init;
  for (std::size_t s0 = 0; s0 < spec.p0.size(); ++s0) {
    if (spec.p0[s0] <= 1e-15) continue;
    LabeledOperator term =
        spec.initial_states[s0].with_wires({sys}).scaled(spec.p0[s0]);
    for (const auto& w : regs.env_wires) {
      Matrix proj = Matrix::Zero(w.dim, w.dim);
      Eigen::Index val = (w.label == setting_label(0)) ? static_cast<Eigen::Index>(s0) : 0;
      proj(val, val) = 1.0;
      term = tensor(term, LabeledOperator({w}, proj));
    }
    init = init ? (*init + term) : term;
  }
  std::vector<std::string> full_order;
  for (const auto& w : full) full_order.push_back(w.label);
  LabeledOperator initial = permute_wires(*init, full_order);

  std::vector<LabeledOperator> gates;
  for (int n = 1; n <= steps; ++n) {
    // 1) stochastic draw of s_n into C.n, conditioned on all past registers
    std::vector<Wire> controls = {regs.env_wires[0]}; // C.0
    for (int j = 1; j < n; ++j) {
      controls.push_back({setting_label(j), 0});
      controls.push_back({outcome_label(j), 0});
    }
    for (auto& c : controls)
      for (const auto& w : regs.env_wires)
        if (w.label == c.label) c.dim = w.dim;
    Wire target{setting_label(n), 0};
    for (const auto& w : regs.env_wires)
      if (w.label == target.label) target.dim = w.dim;

    Eigen::Index dc = 1;
    for (const auto& c : controls) dc *= c.dim;
    Matrix draw = Matrix::Zero(dc * target.dim, dc * target.dim);
    Matrix cbasis = Matrix::Identity(target.dim, target.dim);
    for (Eigen::Index a = 0; a < dc; ++a) {
      // decode control assignment into setting and outcome histories
      std::vector<int> s_hist, m_hist;
      Eigen::Index rem = a;
      std::vector<Eigen::Index> digits(controls.size());
      for (std::size_t c = controls.size(); c-- > 0;) {
        digits[c] = rem % controls[c].dim;
        rem /= controls[c].dim;
      }
      s_hist.push_back(static_cast<int>(digits[0]));
      for (int j = 1; j < n; ++j) {
        s_hist.push_back(static_cast<int>(digits[static_cast<std::size_t>(2 * j - 1)]));
        int anc = static_cast<int>(digits[static_cast<std::size_t>(2 * j)]);
        m_hist.push_back(anc / regs.k_slots[static_cast<std::size_t>(j - 1)]);
      }
      std::vector<double> dist =
          spec.conditionals[static_cast<std::size_t>(n - 1)](s_hist, m_hist);
      LabeledOperator r = stochastic_control(dist, cbasis, target);
      draw.block(a * target.dim, a * target.dim, target.dim, target.dim) = r.matrix();
    }
    std::vector<Wire> draw_wires = controls;
    draw_wires.push_back(target);
    LabeledOperator draw_op(draw_wires, std::move(draw));

    // 2) instrument dilation on (D.n, S), controlled on C.n
    const auto& step_dil = dilations[static_cast<std::size_t>(n - 1)];
    Wire dwire{outcome_label(n), step_dil.front().ancilla.dim};
    Eigen::Index dj = dwire.dim * ds;
    Matrix ctrl = Matrix::Zero(target.dim * dj, target.dim * dj);
    for (Eigen::Index s = 0; s < target.dim; ++s)
      ctrl.block(s * dj, s * dj, dj, dj) =
          step_dil[static_cast<std::size_t>(s)].unitary.matrix();
    LabeledOperator ctrl_op({target, dwire, sys}, std::move(ctrl));

    gates.push_back(embed(ctrl_op, full) * embed(draw_op, full));
  }

  return build_from_dynamics(initial, gates, {sys}, regs.env_wires);
}

} // namespace procmat
