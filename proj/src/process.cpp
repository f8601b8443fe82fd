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

#include "procmat/process.hpp"

#include <cmath>
#include <iostream>
#include <numeric>

namespace procmat {

std::string input_label(int site) { return "A_I." + std::to_string(site); }
std::string output_label(int site) { return "A_O." + std::to_string(site); }
std::string env_label(int step, const std::string& orig) {
  return "E." + std::to_string(step) + "." + orig;
}

namespace {

std::vector<std::string> canonical_order(int n_sites) {
  std::vector<std::string> order;
  for (int n = 1; n < n_sites; ++n) {
    order.push_back(input_label(n));
    order.push_back(output_label(n));
  }
  order.push_back(input_label(n_sites));
  return order;
}

/// PSD check with the small-negative clamp: eigenvalues in [-floor, 0) are
/// rounded up to zero, anything more negative is an error.
LabeledOperator enforce_psd(LabeledOperator op, const std::string& who) {
  EigenSystem es = hermitian_eigen(op);
  double mn = es.values.minCoeff();
  if (mn >= 0.0) return op;
  double floor = tol().psd_floor * std::max(1.0, op.frobenius_norm());
  if (mn < -floor)
    throw Error(who + ": process matrix has eigenvalue " + std::to_string(mn));
  if (mn < -1e-12)
    std::cerr << "procmat: clamping eigenvalue " << mn << " to 0 in " << who << "\n";
  Eigen::VectorXd vals = es.values.cwiseMax(0.0);
  Matrix m = es.vectors * vals.asDiagonal() * es.vectors.adjoint();
  return LabeledOperator(op.wires(), std::move(m));
}

void check_trace(const ProcessMatrix& w, const std::string& who) {
  double expected = static_cast<double>(w.output_dims_product());
  if (std::abs(w.op().trace().real() - expected) > 1e-8 * std::max(1.0, expected))
    throw Error(who + ": trace " + std::to_string(w.op().trace().real()) +
                " != product of output dims " + std::to_string(expected));
}

} // namespace

ProcessMatrix::ProcessMatrix(LabeledOperator op, int n_sites,
                             std::optional<ProbeTimes> probe_times,
                             std::string provenance)
    : op_(permute_wires(op, canonical_order(n_sites))),
      n_sites_(n_sites),
      probe_times_(std::move(probe_times)),
      provenance_(std::move(provenance)) {}

std::vector<std::string> ProcessMatrix::site_labels(int site) const {
  if (site < 1 || site > n_sites_) throw WireMismatchError("site out of range");
  if (site == n_sites_) return {input_label(site)};
  return {input_label(site), output_label(site)};
}

Eigen::Index ProcessMatrix::output_dims_product() const {
  Eigen::Index d = 1;
  for (int n = 1; n < n_sites_; ++n) d *= op_.wire(output_label(n)).dim;
  return d;
}

ProcessMatrix build_from_dynamics(const LabeledOperator& rho_init,
                                  const std::vector<LabeledOperator>& unitaries,
                                  const std::vector<Wire>& system_wires,
                                  const std::vector<Wire>& env_wires,
                                  std::optional<ProbeTimes> probe_times) {
  if (unitaries.empty())
    throw WireMismatchError("build_from_dynamics: need at least one unitary");
  Eigen::Index d_sys = 1, d_env = 1;
  for (const auto& w : system_wires) d_sys *= w.dim;
  for (const auto& w : env_wires) d_env *= w.dim;
  if (rho_init.dim() != d_sys * d_env)
    throw WireMismatchError("build_from_dynamics: initial state dimension mismatch");
  if (!rho_init.is_hermitian(tol().herm) ||
      std::abs(rho_init.trace().real() - 1.0) > 1e-9)
    throw NotDensityOperatorError("build_from_dynamics: rho_init is not a density operator");

  const int n_sites = static_cast<int>(unitaries.size()) + 1;
  std::vector<std::string> sys_order, env_order;
  for (const auto& w : system_wires) sys_order.push_back(w.label);
  for (const auto& w : env_wires) env_order.push_back(w.label);

  auto env_wires_at = [&](int step) {
    std::vector<Wire> ws;
    for (const auto& w : env_wires) ws.push_back({env_label(step, w.label), w.dim});
    return ws;
  };
  auto env_labels_at = [&](int step) {
    std::vector<std::string> ls;
    for (const auto& w : env_wires) ls.push_back(env_label(step, w.label));
    return ls;
  };

  // rho on [A_I.1 (system flattened), E.1.*]
  std::vector<std::string> rho_order = sys_order;
  rho_order.insert(rho_order.end(), env_order.begin(), env_order.end());
  LabeledOperator rho = permute_wires(rho_init, rho_order);
  std::vector<Wire> rho_wires = {{input_label(1), d_sys}};
  for (const auto& w : env_wires_at(1)) rho_wires.push_back(w);
  rho = rho.with_wires(rho_wires);

  // Chain right to left: Lambda^{N-1} = 1^{E.N} * |U^{N-1}>><<U^{N-1}|,
  // Lambda^{n} = |U^n>><<U^n| * Lambda^{n+1}, then W = rho * Lambda^1.
  LabeledOperator chain = LabeledOperator::identity(env_wires_at(n_sites));
  for (int n = n_sites - 1; n >= 1; --n) {
    std::vector<std::string> joint = sys_order;
    joint.insert(joint.end(), env_order.begin(), env_order.end());
    LabeledOperator u = permute_wires(unitaries[static_cast<std::size_t>(n - 1)], joint);
    std::vector<Wire> in = {{output_label(n), d_sys}};
    for (const auto& w : env_wires_at(n)) in.push_back(w);
    std::vector<Wire> out = {{input_label(n + 1), d_sys}};
    for (const auto& w : env_wires_at(n + 1)) out.push_back(w);
    std::vector<Wire> uw = {{output_label(n), d_sys}};
    for (const auto& w : env_wires_at(n)) uw.push_back(w);
    ChoiOperator choi = choi_of_unitary(u.with_wires(uw), in, out);
    chain = link_product(choi.op, chain);
  }
  LabeledOperator w = link_product(rho, chain);
  w = enforce_psd(std::move(w), "build_from_dynamics");
  ProcessMatrix pm(std::move(w), n_sites, std::move(probe_times), "dynamics");
  check_trace(pm, "build_from_dynamics");
  return pm;
}

ProcessMatrix build_from_dynamics(const LabeledOperator& rho_init,
                                  const HamiltonianSpec& spec,
                                  const ProbeTimes& probes,
                                  int slices_per_segment) {
  auto us = segment_unitaries(spec, probes, slices_per_segment);
  return build_from_dynamics(rho_init, us, spec.system_wires, spec.env_wires, probes);
}

ProcessMatrix build_markov(const LabeledOperator& rho,
                           const std::vector<ChoiOperator>& channels) {
  if (channels.empty())
    throw WireMismatchError("build_markov: need at least one channel");
  for (const auto& c : channels)
    if (!c.is_trace_preserving(tol().tp))
      throw NotTracePreservingError("build_markov: channel is not trace preserving");
  LabeledOperator state = rho.with_wires({{input_label(1), rho.dim()}});
  LabeledOperator w = state;
  int n = 1;
  for (const auto& c : channels) {
    ChoiOperator renamed = c.relabeled({output_label(n)}, {input_label(n + 1)});
    w = tensor(w, renamed.op);
    ++n;
  }
  return ProcessMatrix(std::move(w), n, std::nullopt, "markov");
}

ProcessMatrix build_unitary_markov(const LabeledOperator& rho,
                                   const std::vector<LabeledOperator>& unitaries) {
  std::vector<ChoiOperator> chois;
  int n = 1;
  for (const auto& u : unitaries) {
    chois.push_back(choi_of_unitary(u, {{output_label(n), u.dim()}},
                                    {{input_label(n + 1), u.dim()}}));
    ++n;
  }
  return build_markov(rho, chois);
}

ProcessMatrix build_ccc(const std::vector<double>& weights,
                        const std::vector<LabeledOperator>& states,
                        const std::vector<std::vector<ChoiOperator>>& channels) {
  if (weights.empty() || weights.size() != states.size() ||
      weights.size() != channels.size())
    throw BadDistributionError("build_ccc: weights/states/channels size mismatch");
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9)
    throw BadDistributionError("build_ccc: weights sum to " + std::to_string(sum));
  for (double p : weights)
    if (p < 0.0) throw BadDistributionError("build_ccc: negative weight");

  std::optional<LabeledOperator> acc;
  int n_sites = 0;
  for (std::size_t v = 0; v < weights.size(); ++v) {
    ProcessMatrix branch = build_markov(states[v], channels[v]);
    n_sites = branch.sites();
    LabeledOperator term = branch.op().scaled(weights[v]);
    acc = acc ? (*acc + term) : term;
  }
  return ProcessMatrix(std::move(*acc), n_sites, std::nullopt, "ccc");
}

void ClassicalMemorySpec::validate() const {
  if (p0.empty() || p0.size() != initial_states.size())
    throw BadDistributionError("ClassicalMemorySpec: p0/initial_states mismatch");
  double s = std::accumulate(p0.begin(), p0.end(), 0.0);
  if (std::abs(s - 1.0) > 1e-9)
    throw BadDistributionError("ClassicalMemorySpec: p(s_0) sums to " + std::to_string(s));
  if (conditionals.size() != instruments.size())
    throw ValidationError("ClassicalMemorySpec: conditionals/instruments mismatch");
  for (const auto& step : instruments) {
    if (step.empty()) throw InvalidInstrumentError("ClassicalMemorySpec: empty step");
    std::size_t outcomes = step.front().branches.size();
    for (const auto& ins : step) {
      ins.validate(tol().tp);
      if (ins.branches.size() != outcomes)
        throw InvalidInstrumentError(
            "ClassicalMemorySpec: instruments of one step must share outcome count");
    }
  }
}

namespace {

// Recursive sum over setting and outcome histories of the classical memory.
void accumulate_cm(const ClassicalMemorySpec& spec, int step,
                   std::vector<int>& s_hist, std::vector<int>& m_hist,
                   double weight, const LabeledOperator& partial,
                   std::optional<LabeledOperator>& acc) {
  if (weight <= 1e-15) return;
  if (step > static_cast<int>(spec.instruments.size())) {
    LabeledOperator term = partial.scaled(weight);
    acc = acc ? (*acc + term) : term;
    return;
  }
  std::vector<double> ps =
      spec.conditionals[static_cast<std::size_t>(step - 1)](s_hist, m_hist);
  const auto& step_instruments = spec.instruments[static_cast<std::size_t>(step - 1)];
  if (ps.size() != step_instruments.size())
    throw BadDistributionError("classical memory: conditional size mismatch at step " +
                               std::to_string(step));
  for (std::size_t sn = 0; sn < ps.size(); ++sn) {
    if (ps[sn] < -1e-12)
      throw BadDistributionError("classical memory: negative conditional probability");
    if (ps[sn] <= 1e-15) continue;
    const Instrument& ins = step_instruments[sn];
    for (std::size_t m = 0; m < ins.branches.size(); ++m) {
      ChoiOperator branch = ins.branches[m].second.relabeled(
          {output_label(step)}, {input_label(step + 1)});
      s_hist.push_back(static_cast<int>(sn));
      m_hist.push_back(static_cast<int>(m));
      accumulate_cm(spec, step + 1, s_hist, m_hist, weight * ps[sn],
                    tensor(partial, branch.op), acc);
      s_hist.pop_back();
      m_hist.pop_back();
    }
  }
}

} // namespace

ProcessMatrix build_classical_memory(const ClassicalMemorySpec& spec) {
  spec.validate();
  std::optional<LabeledOperator> acc;
  for (std::size_t s0 = 0; s0 < spec.p0.size(); ++s0) {
    if (spec.p0[s0] <= 1e-15) continue;
    LabeledOperator rho =
        spec.initial_states[s0].with_wires({{input_label(1), spec.initial_states[s0].dim()}});
    std::vector<int> s_hist = {static_cast<int>(s0)};
    std::vector<int> m_hist;
    accumulate_cm(spec, 1, s_hist, m_hist, spec.p0[s0], rho, acc);
  }
  if (!acc) throw BadDistributionError("build_classical_memory: empty support");
  return ProcessMatrix(std::move(*acc), spec.sites(), std::nullopt, "classical-memory");
}

} // namespace procmat
