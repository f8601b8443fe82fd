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

#ifndef PROCMAT_LABELED_OPERATOR_HPP
#define PROCMAT_LABELED_OPERATOR_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "procmat/errors.hpp"

namespace procmat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// A named, dimensioned tensor factor of a composite Hilbert space.
struct Wire {
  std::string label;
  Eigen::Index dim = 0;

  friend bool operator==(const Wire& a, const Wire& b) {
    return a.label == b.label && a.dim == b.dim;
  }
};

/// Dense square operator over an ordered list of wires.  The leftmost wire
/// carries the most significant tensor index (row-major composite index).
/// Immutable after construction; all operations below are pure functions.
class LabeledOperator {
public:
  LabeledOperator(std::vector<Wire> wires, Matrix matrix);

  static LabeledOperator identity(std::vector<Wire> wires);

  const std::vector<Wire>& wires() const { return wires_; }
  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  std::vector<std::string> labels() const;
  bool has_wire(const std::string& label) const;
  /// Position of a wire in the ordered list; throws UnknownWireError.
  std::size_t wire_index(const std::string& label) const;
  const Wire& wire(const std::string& label) const;

  double frobenius_norm() const { return matrix_.norm(); }
  Complex trace() const { return matrix_.trace(); }
  bool is_hermitian(double rel_tol) const;
  bool is_unitary(double tol) const;

  LabeledOperator with_wires(std::vector<Wire> wires) const;
  /// Rename wires in place (order and matrix unchanged).
  LabeledOperator renamed(const std::vector<std::string>& new_labels) const;
  LabeledOperator scaled(Complex factor) const;
  LabeledOperator adjoint() const;

  LabeledOperator operator+(const LabeledOperator& other) const;
  LabeledOperator operator-(const LabeledOperator& other) const;
  /// Matrix product; wires must agree exactly (other is permuted to match).
  LabeledOperator operator*(const LabeledOperator& other) const;

private:
  std::vector<Wire> wires_;
  Matrix matrix_;
};

LabeledOperator tensor(const LabeledOperator& p, const LabeledOperator& q);

LabeledOperator permute_wires(const LabeledOperator& p,
                              const std::vector<std::string>& order);

LabeledOperator partial_trace(const LabeledOperator& p,
                              const std::vector<std::string>& labels);

LabeledOperator partial_transpose(const LabeledOperator& p,
                                  const std::vector<std::string>& labels);

struct EigenSystem {
  Eigen::VectorXd values; // ascending
  Matrix vectors;         // columns, orthonormal
};

/// Eigendecomposition of a Hermitian operator.  Eigenvectors within a
/// degenerate cluster come back in arbitrary orthonormal order.
EigenSystem hermitian_eigen(const LabeledOperator& p);

namespace detail {
/// Strides of the composite index for a wire list, leftmost most significant.
std::vector<Eigen::Index> strides(const std::vector<Wire>& wires);
} // namespace detail

} // namespace procmat

#endif
