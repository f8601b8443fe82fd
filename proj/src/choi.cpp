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

#include "procmat/choi.hpp"

#include <algorithm>

#include "procmat/process.hpp"

namespace procmat {

namespace {

Eigen::Index dims_product(const LabeledOperator& op,
                          const std::vector<std::string>& labels) {
  Eigen::Index d = 1;
  for (const auto& lbl : labels) d *= op.wire(lbl).dim;
  return d;
}

} // namespace

Eigen::Index ChoiOperator::in_dim() const { return dims_product(op, in_wires); }
Eigen::Index ChoiOperator::out_dim() const { return dims_product(op, out_wires); }

bool ChoiOperator::is_trace_preserving(double tolerance) const {
  if (out_wires.empty()) {
    // POVM-element view: trace-preserving means the operator is the identity.
    return (op.matrix() - Matrix::Identity(op.dim(), op.dim())).norm() <=
           tolerance * std::max<double>(1.0, op.dim());
  }
  LabeledOperator marg = partial_trace(op, out_wires);
  std::vector<std::string> order = in_wires;
  marg = permute_wires(marg, order);
  return (marg.matrix() - Matrix::Identity(marg.dim(), marg.dim())).norm() <=
         tolerance * std::max<double>(1.0, marg.dim());
}

bool ChoiOperator::is_positive(double floor) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (op.matrix() + op.matrix().adjoint()));
  return es.eigenvalues().minCoeff() >= -floor * std::max(1.0, op.frobenius_norm());
}

LabeledOperator ChoiOperator::apply(const LabeledOperator& state) const {
  return link_product(state, op);
}

ChoiOperator ChoiOperator::relabeled(const std::vector<std::string>& in,
                                     const std::vector<std::string>& out) const {
  if (in.size() != in_wires.size() || out.size() != out_wires.size())
    throw WireMismatchError("relabeled: wire count mismatch");
  std::vector<std::string> order = in_wires;
  order.insert(order.end(), out_wires.begin(), out_wires.end());
  LabeledOperator canon = permute_wires(op, order);
  std::vector<std::string> new_labels = in;
  new_labels.insert(new_labels.end(), out.begin(), out.end());
  return ChoiOperator{canon.renamed(new_labels), in, out};
}

void Instrument::validate(double tolerance) const {
  if (branches.empty()) throw InvalidInstrumentError("instrument has no branches");
  for (const auto& [name, c] : branches)
    if (!c.is_positive(tolerance))
      throw InvalidInstrumentError("branch '" + name + "' is not CP");
  if (!total().is_trace_preserving(tolerance))
    throw InvalidInstrumentError("instrument branches do not sum to a CPTP map");
}

ChoiOperator Instrument::total() const {
  ChoiOperator sum = branches.front().second;
  for (std::size_t i = 1; i < branches.size(); ++i)
    sum.op = sum.op + branches[i].second.op;
  return sum;
}

ChoiOperator choi_of_unitary(const LabeledOperator& u, std::vector<Wire> in,
                             std::vector<Wire> out) {
  Eigen::Index din = 1, dout = 1;
  for (const auto& w : in) din *= w.dim;
  for (const auto& w : out) dout *= w.dim;
  if (din != u.dim() || dout != u.dim())
    throw DimensionMismatchError("choi_of_unitary: wire dims do not match the unitary");
  if (!u.is_unitary(tol().unitary))
    throw NotUnitaryError("choi_of_unitary: operator is not unitary");
  Vector vec(din * dout);
  for (Eigen::Index i = 0; i < din; ++i)
    vec.segment(i * dout, dout) = u.matrix().col(i);
  std::vector<Wire> wires = in;
  wires.insert(wires.end(), out.begin(), out.end());
  std::vector<std::string> in_l, out_l;
  for (const auto& w : in) in_l.push_back(w.label);
  for (const auto& w : out) out_l.push_back(w.label);
  return ChoiOperator{LabeledOperator(std::move(wires), vec * vec.adjoint()),
                      std::move(in_l), std::move(out_l)};
}

ChoiOperator choi_of_kraus(const std::vector<Matrix>& kraus, std::vector<Wire> in,
                           std::vector<Wire> out) {
  Eigen::Index din = 1, dout = 1;
  for (const auto& w : in) din *= w.dim;
  for (const auto& w : out) dout *= w.dim;
  Matrix m = Matrix::Zero(din * dout, din * dout);
  for (const auto& k : kraus) {
    if (k.cols() != din || k.rows() != dout)
      throw DimensionMismatchError("choi_of_kraus: Kraus operator shape mismatch");
    Vector vec(din * dout);
    for (Eigen::Index i = 0; i < din; ++i)
      vec.segment(i * dout, dout) = k.col(i);
    m += vec * vec.adjoint();
  }
  std::vector<Wire> wires = in;
  wires.insert(wires.end(), out.begin(), out.end());
  std::vector<std::string> in_l, out_l;
  for (const auto& w : in) in_l.push_back(w.label);
  for (const auto& w : out) out_l.push_back(w.label);
  return ChoiOperator{LabeledOperator(std::move(wires), std::move(m)),
                      std::move(in_l), std::move(out_l)};
}

std::vector<Matrix> kraus_of_choi(const ChoiOperator& c, double cutoff) {
  std::vector<std::string> order = c.in_wires;
  order.insert(order.end(), c.out_wires.begin(), c.out_wires.end());
  LabeledOperator canon = permute_wires(c.op, order);
  Eigen::Index din = c.in_dim(), dout = c.out_dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      0.5 * (canon.matrix() + canon.matrix().adjoint()));
  std::vector<Matrix> kraus;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    double lam = es.eigenvalues()(k);
    if (lam <= cutoff) continue;
    Vector v = std::sqrt(lam) * es.eigenvectors().col(k);
    Matrix m(dout, din);
    for (Eigen::Index i = 0; i < din; ++i) m.col(i) = v.segment(i * dout, dout);
    kraus.push_back(std::move(m));
  }
  return kraus;
}

LabeledOperator link_product(const LabeledOperator& p, const LabeledOperator& q) {
  std::vector<std::string> shared, p_only, q_only;
  for (const auto& w : p.wires()) {
    if (q.has_wire(w.label)) {
      if (q.wire(w.label).dim != w.dim)
        throw DimensionMismatchError("link_product: shared wire '" + w.label +
                                     "' has mismatched dims");
      shared.push_back(w.label);
    } else {
      p_only.push_back(w.label);
    }
  }
  for (const auto& w : q.wires())
    if (!p.has_wire(w.label)) q_only.push_back(w.label);

  if (shared.empty()) return tensor(p, q);

  // Align: P on [p_only, shared], Q on [shared, q_only].
  std::vector<std::string> p_order = p_only;
  p_order.insert(p_order.end(), shared.begin(), shared.end());
  std::vector<std::string> q_order = shared;
  q_order.insert(q_order.end(), q_only.begin(), q_only.end());
  LabeledOperator pp = permute_wires(p, p_order);
  LabeledOperator qq = permute_wires(q, q_order);

  Eigen::Index da = 1, ds = 1, dr = 1;
  for (const auto& lbl : p_only) da *= p.wire(lbl).dim;
  for (const auto& lbl : shared) ds *= p.wire(lbl).dim;
  for (const auto& lbl : q_only) dr *= q.wire(lbl).dim;

  // (P*Q)_{(a r),(a' r')} = sum_{s,s'} P_{(a s),(a' s')} Q_{(s r),(s' r')}
  // (the row-S index of P contracts the row-S index of Q, which realises the
  // partial transpose on the shared wires), computed as the matrix product
  // M1[(a,a'),(s,s')] . M2[(s,s'),(r,r')].
  Matrix m1(da * da, ds * ds);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index a2 = 0; a2 < da; ++a2)
      for (Eigen::Index s = 0; s < ds; ++s)
        for (Eigen::Index s2 = 0; s2 < ds; ++s2)
          m1(a * da + a2, s * ds + s2) = pp.matrix()(a * ds + s, a2 * ds + s2);
  Matrix m2(ds * ds, dr * dr);
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index s2 = 0; s2 < ds; ++s2)
      for (Eigen::Index r = 0; r < dr; ++r)
        for (Eigen::Index r2 = 0; r2 < dr; ++r2)
          m2(s * ds + s2, r * dr + r2) = qq.matrix()(s * dr + r, s2 * dr + r2);
  Matrix x = m1 * m2;
  Matrix res(da * dr, da * dr);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index a2 = 0; a2 < da; ++a2)
      for (Eigen::Index r = 0; r < dr; ++r)
        for (Eigen::Index r2 = 0; r2 < dr; ++r2)
          res(a * dr + r, a2 * dr + r2) = x(a * da + a2, r * dr + r2);

  std::vector<Wire> wires;
  for (const auto& lbl : p_only) wires.push_back(p.wire(lbl));
  for (const auto& lbl : q_only) wires.push_back(q.wire(lbl));
  return LabeledOperator(std::move(wires), std::move(res));
}

LabeledOperator link_product(const ChoiOperator& p, const ChoiOperator& q) {
  return link_product(p.op, q.op);
}
LabeledOperator link_product(const LabeledOperator& p, const ChoiOperator& q) {
  return link_product(p, q.op);
}
LabeledOperator link_product(const ChoiOperator& p, const LabeledOperator& q) {
  return link_product(p.op, q);
}

double born_rule(const ProcessMatrix& w, const std::vector<ChoiOperator>& ops) {
  if (ops.empty()) throw WireMismatchError("born_rule: no operations given");
  LabeledOperator m = ops.front().op;
  for (std::size_t i = 1; i < ops.size(); ++i) m = tensor(m, ops[i].op);
  if (m.dim() != w.op().dim())
    throw WireMismatchError("born_rule: operations do not tile the process wires");
  for (const auto& lbl : w.op().labels())
    if (!m.has_wire(lbl))
      throw WireMismatchError("born_rule: missing wire '" + lbl + "'");
  LabeledOperator aligned = permute_wires(m, w.op().labels());
  Complex p = (aligned.matrix().cwiseProduct(w.op().matrix())).sum();
  double val = p.real();
  if (val < -1e-9)
    throw NegativeProbabilityError("born_rule: probability " + std::to_string(val));
  return val;
}

} // namespace procmat
