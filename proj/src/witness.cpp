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

#include "procmat/witness.hpp"

#include <algorithm>
#include <cmath>

namespace procmat {

LabeledOperator normalize_process(const ProcessMatrix& w) {
  double tr = w.op().trace().real();
  if (tr <= 1e-14) throw ZeroTraceError("normalize_process: trace is zero");
  return w.op().scaled(1.0 / tr);
}

double negativity(const ProcessMatrix& w,
                  const std::vector<std::string>& first_part) {
  for (const auto& lbl : first_part)
    if (!w.op().has_wire(lbl))
      throw WireMismatchError("negativity: unknown wire '" + lbl + "'");
  LabeledOperator normalized = normalize_process(w);
  LabeledOperator pt = partial_transpose(normalized, first_part);
  EigenSystem es = hermitian_eigen(pt);
  double neg = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    if (es.values(k) < 0.0) neg -= es.values(k);
  return neg;
}

double markov_residual(const ProcessMatrix& w) {
  LabeledOperator normalized = normalize_process(w);
  auto all = w.all_labels();
  std::optional<LabeledOperator> reference;
  for (int site = 1; site <= w.sites(); ++site) {
    // marginal of site group: A_I.1 alone for site 1, (A_O.n, A_I.{n+1})
    // for each link n
    std::vector<std::string> keep;
    if (site == 1) keep = {input_label(1)};
    else keep = {output_label(site - 1), input_label(site)};
    std::vector<std::string> traced;
    for (const auto& lbl : all)
      if (std::find(keep.begin(), keep.end(), lbl) == keep.end())
        traced.push_back(lbl);
    LabeledOperator marg = partial_trace(normalized, traced);
    marg = marg.scaled(1.0 / marg.trace().real());
    reference = reference ? tensor(*reference, marg) : marg;
  }
  LabeledOperator ref = permute_wires(*reference, all);
  return (normalized.matrix() - ref.matrix()).norm();
}

double decomposition_residual(const ProcessMatrix& w,
                         const MixedUnitaryDecomposition& decomp) {
  if (decomp.weights.empty() || decomp.unitaries.empty())
    throw ShapeMismatchError("decomposition_residual: empty decomposition");
  if (static_cast<int>(decomp.unitaries.front().size()) != w.sites() - 1)
    throw ShapeMismatchError("decomposition_residual: step count does not match sites");
  std::optional<LabeledOperator> mix;
  for (std::size_t v = 0; v < decomp.weights.size(); ++v) {
    ProcessMatrix branch = build_unitary_markov(decomp.states[v], decomp.unitaries[v]);
    LabeledOperator term = branch.op().scaled(decomp.weights[v]);
    mix = mix ? (*mix + term) : term;
  }
  LabeledOperator aligned = permute_wires(*mix, w.all_labels());
  return (w.op().matrix() - aligned.matrix()).norm();
}

std::vector<std::pair<std::string, std::vector<std::string>>>
default_cuts(const ProcessMatrix& w) {
  // Each cut ends at a site input so no single link factor T^{A_O.n A_I.n+1}
  // straddles it; product and convex-mixture processes stay separable across
  // every such cut.
  std::vector<std::pair<std::string, std::vector<std::string>>> cuts;
  for (int k = 1; k < w.sites(); ++k) {
    std::vector<std::string> past;
    for (int n = 1; n < k; ++n) {
      past.push_back(input_label(n));
      past.push_back(output_label(n));
    }
    past.push_back(input_label(k));
    std::string name = (k == 1) ? input_label(1) + "|rest"
                                : input_label(1) + ".." + input_label(k) + "|rest";
    cuts.emplace_back(std::move(name), std::move(past));
  }
  return cuts;
}

ClassificationReport classify(const ProcessMatrix& w,
                              const MixedUnitaryDecomposition* decomp) {
  ClassificationReport report;
  report.markov_residual = markov_residual(w);
  report.markovian = report.markov_residual <= 1e-8;
  for (const auto& [name, part] : default_cuts(w))
    report.negativities[name] = negativity(w, part);
  if (decomp) {
    report.decomposition_residual = decomposition_residual(w, *decomp);
    report.mixed_unitary_certified = *report.decomposition_residual <= 1e-8;
  }
  for (const auto& [name, n] : report.negativities)
    if (n > kNegativityThreshold) report.quantum_memory_witnessed = true;
  return report;
}

} // namespace procmat
