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

#include <cmath>

#include "doctest.h"

#include "procmat/structure.hpp"
#include "test_helpers.hpp"

using namespace procmat;
using namespace procmat::testing;

namespace {

HamiltonianSpec qubit_pair_spec(const Matrix& h) {
  return HamiltonianSpec{{{"s", 2}}, {{"e", 2}},
                         ConstantH{LabeledOperator({{"s", 2}, {"e", 2}}, h)}};
}

bool diagonal_in(const Matrix& basis, const Matrix& k, double tolerance) {
  Matrix d = basis.adjoint() * k * basis;
  d.diagonal().setZero();
  return d.norm() < tolerance;
}

} // namespace

TEST_CASE("environment blocks of Z (x) Z are the signed Pauli Z") {
  EnvBlockFamily fam = env_blocks(qubit_pair_spec(kron_oracle(pauli_z(), pauli_z())));
  REQUIRE(fam.sys_dim == 2);
  REQUIRE(fam.env_dim == 2);
  REQUIRE(fam.blocks.size() == 1);
  REQUIRE(fam.blocks[0].size() == 4);
  CHECK((fam.blocks[0][0] - pauli_z()).norm() < 1e-14);          // K_00
  CHECK(fam.blocks[0][1].norm() < 1e-14);                        // K_01
  CHECK(fam.blocks[0][2].norm() < 1e-14);                        // K_10
  CHECK((fam.blocks[0][3] + pauli_z()).norm() < 1e-14);          // K_11
}

TEST_CASE("environment blocks of the swap are shift operators") {
  EnvBlockFamily fam = env_blocks(qubit_pair_spec(swap4()));
  // swap: H[(i e),(j f)] = delta_{i f} delta_{e j}, so K_ij = |j><i|
  Matrix e01 = Matrix::Zero(2, 2), e10 = Matrix::Zero(2, 2);
  e01(0, 1) = 1.0;
  e10(1, 0) = 1.0;
  CHECK((fam.blocks[0][1] - e10).norm() < 1e-14); // K_01 = |1><0|
  CHECK((fam.blocks[0][2] - e01).norm() < 1e-14); // K_10 = |0><1|
}

TEST_CASE("environment blocks are adjoint-closed") {
  std::mt19937_64 rng(7);
  EnvBlockFamily fam = env_blocks(qubit_pair_spec(random_hermitian(rng, 4)));
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      CHECK((fam.blocks[0][i * 2 + j].adjoint() - fam.blocks[0][j * 2 + i]).norm() <
            1e-13);
}

TEST_CASE("commuting family check") {
  SUBCASE("Z (x) Z blocks commute") {
    CommuteCheck res = commuting_family_check(
        env_blocks(qubit_pair_spec(kron_oracle(pauli_z(), pauli_z()))), 1e-9);
    CHECK(res.commuting);
    CHECK(res.max_commutator < 1e-12);
  }
  SUBCASE("swap blocks do not commute") {
    CommuteCheck res = commuting_family_check(env_blocks(qubit_pair_spec(swap4())),
                                              1e-9);
    CHECK_FALSE(res.commuting);
    CHECK(res.max_commutator > 0.5);
    CHECK_FALSE(res.worst_description.empty());
  }
  SUBCASE("Heisenberg exchange blocks do not commute") {
    CommuteCheck res = commuting_family_check(
        env_blocks(qubit_pair_spec(heisenberg(1.0, 0.5))), 1e-9);
    CHECK_FALSE(res.commuting);
  }
}

TEST_CASE("segment-wise commuting families can fail jointly") {
  // each segment alone has commuting blocks; across segments they do not
  PiecewiseConstantH pw{
      {{0.0, 1.0, LabeledOperator({{"s", 2}, {"e", 2}},
                                  Matrix(kron_oracle(pauli_z(), pauli_z())))},
       {1.0, 2.0, LabeledOperator({{"s", 2}, {"e", 2}},
                                  Matrix(kron_oracle(pauli_z(), pauli_x())))}}};
  HamiltonianSpec spec{{{"s", 2}}, {{"e", 2}}, pw};
  CommuteCheck joint = commuting_family_check(env_blocks(spec), 1e-9);
  CHECK_FALSE(joint.commuting);
  for (const auto& h :
       {kron_oracle(pauli_z(), pauli_z()), kron_oracle(pauli_z(), pauli_x())}) {
    CommuteCheck single = commuting_family_check(env_blocks(qubit_pair_spec(h)), 1e-9);
    CHECK(single.commuting);
  }
}

TEST_CASE("simultaneous eigenbasis diagonalizes every block") {
  std::mt19937_64 rng(11);

  SUBCASE("Z (x) Z yields the computational basis up to phase") {
    EnvBlockFamily fam = env_blocks(qubit_pair_spec(kron_oracle(pauli_z(), pauli_z())));
    Matrix b = simultaneous_eigenbasis(fam, rng);
    CHECK((b.adjoint() * b - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK(diagonal_in(b, pauli_z(), 1e-10));
  }

  SUBCASE("construct-then-recover with a random rotated diagonal family") {
    const Eigen::Index de = 4;
    Matrix v = random_unitary(rng, de);
    EnvBlockFamily fam;
    fam.sys_dim = 2;
    fam.env_dim = de;
    fam.env_wires = {{"e", de}};
    std::vector<Matrix> blocks(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // adjoint closure: D_10 = conj(D_01), diagonal blocks real
    Vector d01(de);
    for (Eigen::Index k = 0; k < de; ++k) d01(k) = Complex(u(rng), u(rng));
    Matrix d00 = Matrix::Zero(de, de), d11 = Matrix::Zero(de, de);
    for (Eigen::Index k = 0; k < de; ++k) {
      d00(k, k) = u(rng);
      d11(k, k) = u(rng);
    }
    blocks[0] = v * d00 * v.adjoint();
    blocks[1] = v * Matrix(d01.asDiagonal()) * v.adjoint();
    blocks[2] = blocks[1].adjoint();
    blocks[3] = v * d11 * v.adjoint();
    fam.blocks.push_back(blocks);
    REQUIRE(commuting_family_check(fam, 1e-9).commuting);
    Matrix b = simultaneous_eigenbasis(fam, rng);
    CHECK((b.adjoint() * b - Matrix::Identity(de, de)).norm() < 1e-10);
    for (const auto& k : blocks) CHECK(diagonal_in(b, k, 1e-8));
  }

  SUBCASE("degenerate blocks are refined recursively") {
    // K_00 = 1 is fully degenerate; K_01 carries the structure
    EnvBlockFamily fam;
    fam.sys_dim = 2;
    fam.env_dim = 2;
    fam.env_wires = {{"e", 2}};
    Matrix z = pauli_z();
    fam.blocks.push_back({Matrix::Identity(2, 2), pauli_x(), pauli_x(), z * 0.0});
    REQUIRE(commuting_family_check(fam, 1e-9).commuting);
    std::mt19937_64 rng2(13);
    Matrix b = simultaneous_eigenbasis(fam, rng2);
    CHECK(diagonal_in(b, pauli_x(), 1e-10));
  }
}

TEST_CASE("operator Schmidt decomposition") {
  SUBCASE("a single product term is recovered exactly") {
    Matrix h = 0.7 * kron_oracle(pauli_x(), pauli_y());
    SchmidtTerms st = operator_schmidt(LabeledOperator({{"s", 2}, {"e", 2}}, h),
                                       {{"s", 2}}, {{"e", 2}});
    REQUIRE(st.terms.size() == 1);
    CHECK((kron_oracle(st.terms[0].sys.matrix(), st.terms[0].env.matrix()) - h)
              .norm() < 1e-12);
  }
  SUBCASE("exchange plus field has four independent product terms") {
    Matrix h = heisenberg(1.0, 0.5);
    SchmidtTerms st = operator_schmidt(LabeledOperator({{"s", 2}, {"e", 2}}, h),
                                       {{"s", 2}}, {{"e", 2}});
    CHECK(st.terms.size() == 4);
    Matrix rebuilt = Matrix::Zero(4, 4);
    for (const auto& t : st.terms)
      rebuilt += kron_oracle(t.sys.matrix(), t.env.matrix());
    CHECK((rebuilt - h).norm() < 1e-10);
    for (std::size_t k = 1; k < st.terms.size(); ++k)
      CHECK(st.terms[k - 1].weight >= st.terms[k].weight);
  }
  SUBCASE("random Hermitian reconstructs") {
    std::mt19937_64 rng(17);
    Matrix h = random_hermitian(rng, 8);
    SchmidtTerms st = operator_schmidt(LabeledOperator({{"s", 2}, {"e", 4}}, h),
                                       {{"s", 2}}, {{"e", 4}});
    Matrix rebuilt = Matrix::Zero(8, 8);
    for (const auto& t : st.terms)
      rebuilt += kron_oracle(t.sys.matrix(), t.env.matrix());
    CHECK((rebuilt - h).norm() < 1e-10);
  }
}

TEST_CASE("structure certificate") {
  std::mt19937_64 rng(19);

  SUBCASE("holds for Z (x) Z and produces a valid basis") {
    CommutingBlocksCertificate cert =
        commuting_blocks_certificate(qubit_pair_spec(kron_oracle(pauli_z(), pauli_z())), rng);
    CHECK(cert.holds);
    CHECK((cert.basis.adjoint() * cert.basis - Matrix::Identity(2, 2)).norm() <
          1e-12);
  }
  SUBCASE("fails for the swap") {
    CommutingBlocksCertificate cert = commuting_blocks_certificate(qubit_pair_spec(swap4()), rng);
    CHECK_FALSE(cert.holds);
    CHECK(cert.evidence.max_commutator > 0.5);
  }
  SUBCASE("fails for Heisenberg exchange") {
    CHECK_FALSE(commuting_blocks_certificate(qubit_pair_spec(heisenberg(1.0, 0.5)), rng).holds);
  }
}

TEST_CASE("a commuting family leaves an environment observable conserved") {
  std::mt19937_64 rng(23);
  Matrix h = kron_oracle(pauli_z(), pauli_z()) +
             0.3 * kron_oracle(pauli_x(), pauli_z());
  HamiltonianSpec spec = qubit_pair_spec(h);
  CommutingBlocksCertificate cert = commuting_blocks_certificate(spec, rng);
  REQUIRE(cert.holds);
  Vector eigs(2);
  eigs << 0.0, 1.0;
  Matrix a = cert.basis * eigs.asDiagonal() * cert.basis.adjoint();
  Matrix lifted = kron_oracle(Matrix::Identity(2, 2), a);
  CHECK((h * lifted - lifted * h).norm() < 1e-10);
}

TEST_CASE("conditional dynamics projects the environment index") {
  Matrix h = kron_oracle(pauli_z(), pauli_z());
  HamiltonianSpec spec = qubit_pair_spec(h);
  Vector e0(2), e1(2);
  e0 << 1.0, 0.0;
  e1 << 0.0, 1.0;
  HamiltonianSpec c0 = conditional_spec(spec, e0);
  HamiltonianSpec c1 = conditional_spec(spec, e1);
  Matrix u0 = partial_trace(propagator(c0, 0.0, 0.8), {"E.cond"}).matrix();
  Matrix u1 = partial_trace(propagator(c1, 0.0, 0.8), {"E.cond"}).matrix();
  CHECK((u0 - expm_hermitian(LabeledOperator({{"s", 2}}, pauli_z()), 0.8).matrix())
            .norm() < 1e-12);
  CHECK((u1 - expm_hermitian(LabeledOperator({{"s", 2}}, Matrix(-pauli_z())), 0.8)
                  .matrix())
            .norm() < 1e-12);
}

TEST_CASE("mixed-unitary extraction for a dephasing interaction") {
  std::mt19937_64 rng(29);
  double w = 0.6;
  HamiltonianSpec spec = qubit_pair_spec(w * kron_oracle(pauli_z(), pauli_z()));
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  Matrix rho_s = random_density(rng, 2);
  LabeledOperator rho({{"s", 2}, {"e", 2}}, kron_oracle(rho_s, plus));
  ProbeTimes probes{{0.0, 0.7, 1.5}};
  MixedUnitaryDecomposition dec = mixed_unitary_components(spec, probes, rho, rng);

  REQUIRE(dec.weights.size() == 2);
  CHECK(dec.weights[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(dec.weights[1] == doctest::Approx(0.5).epsilon(1e-10));
  for (const auto& st : dec.states)
    CHECK((st.matrix() - rho_s).norm() < 1e-10); // product state: no steering
  for (std::size_t b = 0; b < dec.weights.size(); ++b) {
    Vector nu = dec.basis.col(dec.basis_columns[b]);
    double lam = (nu.adjoint() * pauli_z() * nu).value().real();
    CHECK(std::abs(std::abs(lam) - 1.0) < 1e-10);
    REQUIRE(dec.unitaries[b].size() == 2);
    for (std::size_t n = 0; n < 2; ++n) {
      double dt = probes.times[n + 1] - probes.times[n];
      Matrix expect =
          expm_hermitian(LabeledOperator({{"s", 2}}, Matrix(w * lam * pauli_z())), dt)
              .matrix();
      CHECK((dec.unitaries[b][n].matrix() - expect).norm() < 1e-10);
    }
  }
}

TEST_CASE("an environment eigenstate collapses to a single branch") {
  std::mt19937_64 rng(31);
  HamiltonianSpec spec = qubit_pair_spec(kron_oracle(pauli_z(), pauli_z()));
  Matrix e0 = Matrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  std::mt19937_64 rng2(37);
  Matrix rho_s = random_density(rng2, 2);
  LabeledOperator rho({{"s", 2}, {"e", 2}}, kron_oracle(rho_s, e0));
  MixedUnitaryDecomposition dec =
      mixed_unitary_components(spec, ProbeTimes{{0.0, 1.0}}, rho, rng);
  REQUIRE(dec.weights.size() == 1);
  CHECK(dec.weights[0] == doctest::Approx(1.0).epsilon(1e-10));
  Vector nu = dec.basis.col(dec.basis_columns[0]);
  CHECK(std::abs(std::abs(nu(0)) - 1.0) < 1e-10); // |0> up to phase
}

TEST_CASE("mixed-unitary extraction refuses non-commuting interactions") {
  std::mt19937_64 rng(41);
  HamiltonianSpec spec = qubit_pair_spec(swap4());
  LabeledOperator rho({{"s", 2}, {"e", 2}}, bell4());
  CHECK_THROWS_AS(mixed_unitary_components(spec, ProbeTimes{{0.0, 1.0}}, rho, rng),
                  ConditionFailsError);
}
