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

#include "procmat/structure.hpp"

#include <algorithm>
#include <cmath>

namespace procmat {

std::vector<const Matrix*> EnvBlockFamily::flat() const {
  std::vector<const Matrix*> out;
  for (const auto& snap : blocks)
    for (const auto& b : snap) out.push_back(&b);
  return out;
}

EnvBlockFamily env_blocks(const HamiltonianSpec& spec, int samples_per_term,
                          double t0, double t1) {
  spec.validate();
  EnvBlockFamily fam;
  fam.sys_dim = spec.system_dim();
  fam.env_dim = spec.env_dim();
  fam.env_wires = spec.env_wires;
  for (const auto& h : spec.snapshots(samples_per_term, t0, t1)) {
    // h is aligned system-most-significant, so block (i,j) is a submatrix.
    std::vector<Matrix> snap;
    snap.reserve(static_cast<std::size_t>(fam.sys_dim * fam.sys_dim));
    for (Eigen::Index i = 0; i < fam.sys_dim; ++i)
      for (Eigen::Index j = 0; j < fam.sys_dim; ++j)
        snap.push_back(h.matrix().block(i * fam.env_dim, j * fam.env_dim,
                                        fam.env_dim, fam.env_dim));
    fam.blocks.push_back(std::move(snap));
  }
  return fam;
}

CommuteCheck commuting_family_check(const EnvBlockFamily& family, double tolerance) {
  auto blocks = family.flat();
  if (blocks.empty()) throw Error("commuting_family_check: empty family");
  CommuteCheck out;
  out.commuting = true;
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = a; b < blocks.size(); ++b) {
      const Matrix& ka = *blocks[a];
      const Matrix& kb = *blocks[b];
      double norm = (ka * kb - kb * ka).norm();
      double scale = std::max(1.0, ka.norm() * kb.norm());
      double scaled = norm / scale;
      if (scaled > out.max_commutator) {
        out.max_commutator = scaled;
        out.first = static_cast<int>(a);
        out.second = static_cast<int>(b);
      }
    }
  }
  if (out.first >= 0) {
    Eigen::Index nblk = family.sys_dim * family.sys_dim;
    auto describe = [&](int flat_idx) {
      Eigen::Index t = flat_idx / nblk, r = flat_idx % nblk;
      return "K[" + std::to_string(r / family.sys_dim) + "," +
             std::to_string(r % family.sys_dim) + "]@segment" + std::to_string(t);
    };
    out.worst_description = describe(out.first) + " vs " + describe(out.second);
  }
  out.commuting = out.max_commutator <= tolerance;
  return out;
}

namespace {

bool blocks_diagonal_in(const EnvBlockFamily& family, const Matrix& basis,
                        double rel_tol) {
  for (const Matrix* k : family.flat()) {
    Matrix rotated = basis.adjoint() * (*k) * basis;
    double off = rotated.norm() * 0.0;
    Matrix diag_removed = rotated;
    diag_removed.diagonal().setZero();
    off = diag_removed.norm();
    if (off > rel_tol * std::max(1.0, k->norm())) return false;
  }
  return true;
}

// Split the subspace spanned by `cols` of `basis` by the eigenvalues of a
// Hermitian generator restricted to it, recursing into degenerate clusters.
void refine_by_generator(Matrix& basis, Eigen::Index col0, Eigen::Index ncols,
                         const Matrix& gen, double gap) {
  if (ncols <= 1) return;
  Matrix sub = basis.middleCols(col0, ncols);
  Matrix restricted = sub.adjoint() * gen * sub;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (restricted + restricted.adjoint()));
  basis.middleCols(col0, ncols) = sub * es.eigenvectors();
  // caller regroups clusters by eigenvalue gaps
  (void)gap;
}

} // namespace

Matrix simultaneous_eigenbasis(const EnvBlockFamily& family, std::mt19937_64& rng) {
  auto blocks = family.flat();
  if (blocks.empty()) throw Error("simultaneous_eigenbasis: empty family");
  const Eigen::Index d = family.env_dim;
  const double rel_tol = 1e-8;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Complex imag(0.0, 1.0);

  // Generic random Hermitian combination splits degeneracies with prob. 1.
  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix t = Matrix::Zero(d, d);
    for (const Matrix* k : blocks) {
      double c = gauss(rng), s = gauss(rng);
      t += c * 0.5 * (*k + k->adjoint());
      t += s * (*k - k->adjoint()) / (2.0 * imag);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (t + t.adjoint()));
    Matrix basis = es.eigenvectors();
    if (blocks_diagonal_in(family, basis, rel_tol)) return basis;
  }

  // Fallback: sequential refinement.  Start from one cluster covering the
  // whole space and split it with each Hermitian generator in turn.
  Matrix basis = Matrix::Identity(d, d);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters = {{0, d}};
  const double gap = 1e-8;
  auto generators = [&]() {
    std::vector<Matrix> gens;
    for (const Matrix* k : blocks) {
      gens.push_back(0.5 * (*k + k->adjoint()));
      gens.push_back((*k - k->adjoint()) / (2.0 * imag));
    }
    return gens;
  }();
  for (const Matrix& gen : generators) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> next;
    for (auto [c0, nc] : clusters) {
      if (nc == 1) {
        next.emplace_back(c0, nc);
        continue;
      }
      refine_by_generator(basis, c0, nc, gen, gap);
      Matrix sub = basis.middleCols(c0, nc);
      Matrix restricted = sub.adjoint() * gen * sub;
      Eigen::VectorXd vals = restricted.diagonal().real();
      Eigen::Index start = 0;
      for (Eigen::Index k = 1; k <= nc; ++k) {
        if (k == nc || vals(k) - vals(k - 1) > gap * std::max(1.0, gen.norm())) {
          next.emplace_back(c0 + start, k - start);
          start = k;
        }
      }
    }
    clusters = std::move(next);
  }
  if (!blocks_diagonal_in(family, basis, rel_tol))
    throw NotCommutingError(
        "simultaneous_eigenbasis: family is not simultaneously diagonalizable");
  return basis;
}

SchmidtTerms operator_schmidt(const LabeledOperator& h,
                              const std::vector<Wire>& system_wires,
                              const std::vector<Wire>& env_wires) {
  if (!h.is_hermitian(tol().herm))
    throw NotHermitianError("operator_schmidt: H is not Hermitian");
  std::vector<std::string> order;
  for (const auto& w : system_wires) order.push_back(w.label);
  for (const auto& w : env_wires) order.push_back(w.label);
  LabeledOperator aligned = permute_wires(h, order);
  Eigen::Index ds = 1, de = 1;
  for (const auto& w : system_wires) ds *= w.dim;
  for (const auto& w : env_wires) de *= w.dim;

  // Reshuffle H_{(i e),(j f)} into R_{(i j),(e f)} and SVD.
  Matrix r(ds * ds, de * de);
  for (Eigen::Index i = 0; i < ds; ++i)
    for (Eigen::Index j = 0; j < ds; ++j)
      for (Eigen::Index e = 0; e < de; ++e)
        for (Eigen::Index f = 0; f < de; ++f)
          r(i * ds + j, e * de + f) = aligned.matrix()(i * de + e, j * de + f);
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SchmidtTerms out;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    double s = svd.singularValues()(k);
    if (s <= 1e-12) break;
    Matrix sm(ds, ds), em(de, de);
    for (Eigen::Index i = 0; i < ds; ++i)
      for (Eigen::Index j = 0; j < ds; ++j) sm(i, j) = svd.matrixU()(i * ds + j, k);
    for (Eigen::Index e = 0; e < de; ++e)
      for (Eigen::Index f = 0; f < de; ++f)
        em(e, f) = std::conj(svd.matrixV()(e * de + f, k));
    out.terms.push_back({s, LabeledOperator(system_wires, std::sqrt(s) * sm),
                         LabeledOperator(env_wires, std::sqrt(s) * em)});
  }
  return out;
}

CommutingBlocksCertificate commuting_blocks_certificate(const HamiltonianSpec& spec,
                                         std::mt19937_64& rng, double tolerance) {
  if (tolerance < 0.0) tolerance = tol().commute;
  EnvBlockFamily fam = env_blocks(spec);
  CommutingBlocksCertificate cert;
  cert.evidence = commuting_family_check(fam, tolerance);
  cert.holds = cert.evidence.commuting;
  if (cert.holds) cert.basis = simultaneous_eigenbasis(fam, rng);
  return cert;
}

HamiltonianSpec conditional_spec(const HamiltonianSpec& spec, const Vector& nu) {
  const Eigen::Index ds = spec.system_dim();
  const Eigen::Index de = spec.env_dim();
  if (nu.size() != de)
    throw DimensionMismatchError("conditional_spec: basis vector dimension mismatch");
  auto project = [&](const LabeledOperator& h) {
    std::vector<std::string> order;
    for (const auto& w : spec.system_wires) order.push_back(w.label);
    for (const auto& w : spec.env_wires) order.push_back(w.label);
    LabeledOperator aligned = permute_wires(h, order);
    Matrix cond(ds, ds);
    for (Eigen::Index i = 0; i < ds; ++i)
      for (Eigen::Index j = 0; j < ds; ++j)
        cond(i, j) =
            nu.adjoint() * aligned.matrix().block(i * de, j * de, de, de) * nu;
    // one flattened system wire keeps the conditional spec self-contained
    return LabeledOperator({{"S.cond", ds}}, std::move(cond));
  };
  auto lift = [&](const LabeledOperator& sys_op) {
    return tensor(sys_op, LabeledOperator::identity({{"E.cond", 1}}));
  };
  using TermVariant = decltype(HamiltonianSpec::term);
  std::optional<TermVariant> new_term;
  if (std::holds_alternative<ConstantH>(spec.term)) {
    new_term = ConstantH{lift(project(std::get<ConstantH>(spec.term).h))};
  } else if (std::holds_alternative<PiecewiseConstantH>(spec.term)) {
    PiecewiseConstantH pw;
    for (const auto& s : std::get<PiecewiseConstantH>(spec.term).segments)
      pw.segments.push_back({s.t_start, s.t_end, lift(project(s.h))});
    new_term = std::move(pw);
  } else if (std::holds_alternative<PulseTrainH>(spec.term)) {
    PulseTrainH pt;
    const auto& src = std::get<PulseTrainH>(spec.term);
    if (src.base) pt.base = lift(project(*src.base));
    for (const auto& [t, h] : src.pulses) pt.pulses.emplace_back(t, lift(project(h)));
    new_term = std::move(pt);
  } else {
    // lambda_j^nu(t) folds into the schedules: <nu|E_j|nu> is a scalar.
    ProductTermsH dst;
    for (const auto& term : std::get<ProductTermsH>(spec.term).terms) {
      std::vector<std::string> env_order;
      for (const auto& w : spec.env_wires) env_order.push_back(w.label);
      LabeledOperator env_aligned = permute_wires(term.env, env_order);
      Complex lam = nu.adjoint() * env_aligned.matrix() * nu;
      std::vector<std::string> sys_order;
      for (const auto& w : spec.system_wires) sys_order.push_back(w.label);
      LabeledOperator sys_aligned = permute_wires(term.sys, sys_order);
      LabeledOperator sys_flat({{"S.cond", ds}}, sys_aligned.matrix());
      auto sched = term.schedule;
      double lam_re = lam.real();
      dst.terms.push_back({[sched, lam_re](double t) { return sched(t) * lam_re; },
                           std::move(sys_flat),
                           LabeledOperator::identity({{"E.cond", 1}})});
    }
    new_term = std::move(dst);
  }
  return HamiltonianSpec{{{"S.cond", ds}}, {{"E.cond", 1}}, std::move(*new_term)};
}

MixedUnitaryDecomposition mixed_unitary_components(const HamiltonianSpec& spec,
                                                   const ProbeTimes& probes,
                                                   const LabeledOperator& rho_init,
                                                   std::mt19937_64& rng,
                                                   int slices_per_segment) {
  probes.validate();
  CommutingBlocksCertificate cert = commuting_blocks_certificate(spec, rng);
  if (!cert.holds)
    throw ConditionFailsError("mixed_unitary_components: " +
                              cert.evidence.worst_description + " (commutator " +
                              std::to_string(cert.evidence.max_commutator) + ")");
  const Eigen::Index de = spec.env_dim();
  // rho_init on system wires ++ env wires
  std::vector<std::string> order;
  for (const auto& w : spec.system_wires) order.push_back(w.label);
  for (const auto& w : spec.env_wires) order.push_back(w.label);
  LabeledOperator rho = permute_wires(rho_init, order);
  const Eigen::Index ds = spec.system_dim();
  if (rho.dim() != ds * de)
    throw DimensionMismatchError("mixed_unitary_components: rho_init dimension mismatch");
  if (!rho.is_hermitian(tol().herm) || std::abs(rho.trace().real() - 1.0) > 1e-9)
    throw NotDensityOperatorError("mixed_unitary_components: rho_init is not a density operator");

  MixedUnitaryDecomposition out;
  out.basis = cert.basis;
  for (Eigen::Index v = 0; v < de; ++v) {
    Vector nu = cert.basis.col(v);
    // steered (unnormalized) system state: sum_ef conj(nu_e) rho_{(i e),(j f)} nu_f
    Matrix steered = Matrix::Zero(ds, ds);
    for (Eigen::Index i = 0; i < ds; ++i)
      for (Eigen::Index j = 0; j < ds; ++j)
        steered(i, j) = nu.adjoint() * rho.matrix().block(i * de, j * de, de, de) * nu;
    double p = steered.trace().real();
    if (p < 1e-12) continue; // zero-probability branch omitted
    out.basis_columns.push_back(static_cast<int>(v));
    out.weights.push_back(p);
    out.states.push_back(LabeledOperator({{"S.cond", ds}}, steered / p));
    HamiltonianSpec cond = conditional_spec(spec, nu);
    std::vector<LabeledOperator> us;
    for (std::size_t n = 0; n + 1 < probes.times.size(); ++n) {
      LabeledOperator u = propagator(cond, probes.times[n], probes.times[n + 1],
                                     slices_per_segment);
      us.push_back(LabeledOperator({{"S.cond", ds}},
                                   partial_trace(u, {"E.cond"}).matrix()));
    }
    out.unitaries.push_back(std::move(us));
  }
  // renormalize after dropping negligible branches
  double total = 0.0;
  for (double p : out.weights) total += p;
  if (total <= 0.0)
    throw ConditionFailsError("mixed_unitary_components: no branch has support");
  for (double& p : out.weights) p /= total;
  return out;
}

} // namespace procmat
