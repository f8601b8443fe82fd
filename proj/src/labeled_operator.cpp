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

#include "procmat/labeled_operator.hpp"

#include <algorithm>
#include <unordered_set>

namespace procmat {

Tolerances& tol() {
  static Tolerances t;
  return t;
}

namespace detail {

std::vector<Eigen::Index> strides(const std::vector<Wire>& wires) {
  std::vector<Eigen::Index> s(wires.size(), 1);
  for (std::size_t i = wires.size(); i-- > 1;)
    s[i - 1] = s[i] * wires[i].dim;
  return s;
}

} // namespace detail

LabeledOperator::LabeledOperator(std::vector<Wire> wires, Matrix matrix)
    : wires_(std::move(wires)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols())
    throw DimensionMismatchError("operator matrix must be square");
  Eigen::Index side = 1;
  std::unordered_set<std::string> seen;
  for (const auto& w : wires_) {
    if (w.dim < 1)
      throw DimensionMismatchError("wire '" + w.label + "' has dim < 1");
    if (!seen.insert(w.label).second)
      throw DuplicateWireError("duplicate wire label '" + w.label + "'");
    side *= w.dim;
  }
  if (side != matrix_.rows())
    throw DimensionMismatchError("matrix side " + std::to_string(matrix_.rows()) +
                                 " != product of wire dims " + std::to_string(side));
}

LabeledOperator LabeledOperator::identity(std::vector<Wire> wires) {
  Eigen::Index side = 1;
  for (const auto& w : wires) side *= w.dim;
  return LabeledOperator(std::move(wires), Matrix::Identity(side, side));
}

std::vector<std::string> LabeledOperator::labels() const {
  std::vector<std::string> out;
  out.reserve(wires_.size());
  for (const auto& w : wires_) out.push_back(w.label);
  return out;
}

bool LabeledOperator::has_wire(const std::string& label) const {
  return std::any_of(wires_.begin(), wires_.end(),
                     [&](const Wire& w) { return w.label == label; });
}

std::size_t LabeledOperator::wire_index(const std::string& label) const {
  for (std::size_t i = 0; i < wires_.size(); ++i)
    if (wires_[i].label == label) return i;
  throw UnknownWireError("unknown wire '" + label + "'");
}

const Wire& LabeledOperator::wire(const std::string& label) const {
  return wires_[wire_index(label)];
}

bool LabeledOperator::is_hermitian(double rel_tol) const {
  double n = matrix_.norm();
  return (matrix_ - matrix_.adjoint()).norm() <= rel_tol * std::max(1.0, n);
}

bool LabeledOperator::is_unitary(double t) const {
  Matrix g = matrix_.adjoint() * matrix_;
  return (g - Matrix::Identity(dim(), dim())).norm() <= t * std::max<double>(1.0, dim());
}

LabeledOperator LabeledOperator::with_wires(std::vector<Wire> wires) const {
  return LabeledOperator(std::move(wires), matrix_);
}

LabeledOperator LabeledOperator::renamed(const std::vector<std::string>& new_labels) const {
  if (new_labels.size() != wires_.size())
    throw WireMismatchError("renamed: label count mismatch");
  std::vector<Wire> ws = wires_;
  for (std::size_t i = 0; i < ws.size(); ++i) ws[i].label = new_labels[i];
  return LabeledOperator(std::move(ws), matrix_);
}

LabeledOperator LabeledOperator::scaled(Complex factor) const {
  return LabeledOperator(wires_, factor * matrix_);
}

LabeledOperator LabeledOperator::adjoint() const {
  return LabeledOperator(wires_, matrix_.adjoint());
}

LabeledOperator LabeledOperator::operator+(const LabeledOperator& other) const {
  LabeledOperator q = permute_wires(other, labels());
  return LabeledOperator(wires_, matrix_ + q.matrix());
}

LabeledOperator LabeledOperator::operator-(const LabeledOperator& other) const {
  LabeledOperator q = permute_wires(other, labels());
  return LabeledOperator(wires_, matrix_ - q.matrix());
}

LabeledOperator LabeledOperator::operator*(const LabeledOperator& other) const {
  LabeledOperator q = permute_wires(other, labels());
  return LabeledOperator(wires_, matrix_ * q.matrix());
}

LabeledOperator tensor(const LabeledOperator& p, const LabeledOperator& q) {
  for (const auto& w : q.wires())
    if (p.has_wire(w.label))
      throw DuplicateWireError("tensor: wire '" + w.label + "' present in both operands");
  std::vector<Wire> wires = p.wires();
  wires.insert(wires.end(), q.wires().begin(), q.wires().end());
  Matrix m(p.dim() * q.dim(), p.dim() * q.dim());
  for (Eigen::Index i = 0; i < p.dim(); ++i)
    for (Eigen::Index j = 0; j < p.dim(); ++j)
      m.block(i * q.dim(), j * q.dim(), q.dim(), q.dim()) = p.matrix()(i, j) * q.matrix();
  return LabeledOperator(std::move(wires), std::move(m));
}

LabeledOperator permute_wires(const LabeledOperator& p,
                              const std::vector<std::string>& order) {
  if (order == p.labels()) return p;
  if (order.size() != p.wires().size())
    throw UnknownWireError("permute_wires: order is not a permutation of the labels");
  std::vector<std::size_t> src; // position in p of each new wire
  src.reserve(order.size());
  std::vector<Wire> new_wires;
  for (const auto& lbl : order) {
    std::size_t k = p.wire_index(lbl); // throws UnknownWireError
    if (std::find(src.begin(), src.end(), k) != src.end())
      throw UnknownWireError("permute_wires: repeated label '" + lbl + "'");
    src.push_back(k);
    new_wires.push_back(p.wires()[k]);
  }
  auto old_strides = detail::strides(p.wires());
  auto new_strides = detail::strides(new_wires);
  const Eigen::Index d = p.dim();
  // map[new composite index] = old composite index
  std::vector<Eigen::Index> map(static_cast<std::size_t>(d));
  for (Eigen::Index idx = 0; idx < d; ++idx) {
    Eigen::Index rem = idx, old_idx = 0;
    for (std::size_t k = 0; k < new_wires.size(); ++k) {
      Eigen::Index digit = rem / new_strides[k];
      rem %= new_strides[k];
      old_idx += digit * old_strides[src[k]];
    }
    map[static_cast<std::size_t>(idx)] = old_idx;
  }
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      m(i, j) = p.matrix()(map[i], map[j]);
  return LabeledOperator(std::move(new_wires), std::move(m));
}

LabeledOperator partial_trace(const LabeledOperator& p,
                              const std::vector<std::string>& labels) {
  for (const auto& lbl : labels) p.wire_index(lbl); // validate
  std::vector<std::string> keep;
  for (const auto& w : p.wires())
    if (std::find(labels.begin(), labels.end(), w.label) == labels.end())
      keep.push_back(w.label);
  std::vector<std::string> order = keep;
  for (const auto& lbl : labels) order.push_back(lbl);
  LabeledOperator q = permute_wires(p, order);
  Eigen::Index dk = 1;
  for (const auto& lbl : keep) dk *= p.wire(lbl).dim;
  Eigen::Index dt = p.dim() / dk;
  Matrix m = Matrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j)
      for (Eigen::Index t = 0; t < dt; ++t)
        m(i, j) += q.matrix()(i * dt + t, j * dt + t);
  std::vector<Wire> ws;
  for (const auto& lbl : keep) ws.push_back(p.wire(lbl));
  return LabeledOperator(std::move(ws), std::move(m));
}

LabeledOperator partial_transpose(const LabeledOperator& p,
                                  const std::vector<std::string>& labels) {
  for (const auto& lbl : labels) p.wire_index(lbl); // validate
  auto strides = detail::strides(p.wires());
  std::vector<std::size_t> tpos;
  for (std::size_t k = 0; k < p.wires().size(); ++k)
    if (std::find(labels.begin(), labels.end(), p.wires()[k].label) != labels.end())
      tpos.push_back(k);
  const Eigen::Index d = p.dim();
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      // swap row and column digits on the transposed wires
      Eigen::Index si = i, sj = j;
      for (std::size_t k : tpos) {
        Eigen::Index dim = p.wires()[k].dim;
        Eigen::Index di = (i / strides[k]) % dim;
        Eigen::Index dj = (j / strides[k]) % dim;
        si += (dj - di) * strides[k];
        sj += (di - dj) * strides[k];
      }
      m(i, j) = p.matrix()(si, sj);
    }
  }
  return LabeledOperator(p.wires(), std::move(m));
}

EigenSystem hermitian_eigen(const LabeledOperator& p) {
  if (!p.is_hermitian(tol().herm))
    throw NotHermitianError("hermitian_eigen: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (p.matrix() + p.matrix().adjoint()));
  if (es.info() != Eigen::Success)
    throw Error("hermitian_eigen: eigensolver failed");
  EigenSystem out{es.eigenvalues(), es.eigenvectors()};
  Matrix recon = out.vectors * out.values.asDiagonal() * out.vectors.adjoint();
  if ((recon - p.matrix()).norm() > tol().eig * std::max(1.0, p.frobenius_norm()))
    throw Error("hermitian_eigen: reconstruction residual above tolerance");
  return out;
}

} // namespace procmat
