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

#ifndef PROCMAT_ERRORS_HPP
#define PROCMAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace procmat {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DuplicateWireError : Error {
  using Error::Error;
};
struct UnknownWireError : Error {
  using Error::Error;
};
struct DimensionMismatchError : Error {
  using Error::Error;
};
struct NotHermitianError : Error {
  using Error::Error;
};
struct NotUnitaryError : Error {
  using Error::Error;
};
struct WireMismatchError : Error {
  using Error::Error;
};
struct NegativeProbabilityError : Error {
  using Error::Error;
};
struct InvalidIntervalError : Error {
  using Error::Error;
};
struct NotCommutingError : Error {
  using Error::Error;
};
struct ConditionFailsError : Error {
  using Error::Error;
};
struct NotDensityOperatorError : Error {
  using Error::Error;
};
struct NotTracePreservingError : Error {
  using Error::Error;
};
struct BadDistributionError : Error {
  using Error::Error;
};
struct InvalidInstrumentError : Error {
  using Error::Error;
};
struct InvalidDecompositionError : Error {
  using Error::Error;
};
struct IncompleteBasisError : Error {
  using Error::Error;
};
struct ShapeMismatchError : Error {
  using Error::Error;
};
struct ZeroTraceError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct SchemaError : ValidationError {
  using ValidationError::ValidationError;
};

// Global numeric tolerances.  Defaults follow double precision at the
// dimensions this library targets (side <= 4096); the CLI can override
// them once at startup via --tol.
struct Tolerances {
  double herm = 1e-9;      // relative Frobenius Hermiticity check
  double eig = 1e-9;       // eigendecomposition reconstruction
  double unitary = 1e-9;   // ||U^dag U - 1||_F
  double tp = 1e-9;        // trace-preserving check on Choi operators
  double commute = 1e-8;   // commuting-family check (absolute, norm scaled)
  double psd_floor = 1e-9; // eigenvalue floor for process matrices
};

Tolerances& tol();

} // namespace procmat

#endif
