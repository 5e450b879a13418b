// Copyright 2026 The Unitarity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unitarity/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "unitarity/optimize.hpp"

namespace unitarity {

namespace {

double dim_sq_minus_one(const Superoperator &s) {
  const double d = s.dim();
  return d * d - 1.0;
}

Eigen::Matrix3d rot_z(double t) {
  Eigen::Matrix3d r;
  r << std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d rot_y(double t) {
  Eigen::Matrix3d r;
  r << std::cos(t), 0, std::sin(t), 0, 1, 0, -std::sin(t), 0, std::cos(t);
  return r;
}

}  // namespace

double unitarity(const Superoperator &s) {
  const auto blocks = block_decompose(s);
  return blocks.unital_block.squaredNorm() / dim_sq_minus_one(s);
}

double survival_rate(const Superoperator &s) { return s.matrix()(0, 0); }

double average_infidelity(const Superoperator &s, std::vector<std::string> *warnings) {
  if (warnings && !is_trace_preserving(s)) {
    warnings->push_back("average_infidelity: channel is not trace preserving; "
                        "the closed form assumes TP");
  }
  const double d = s.dim();
  return 1.0 - (s.matrix().trace() + d) / (d * d + d);
}

RMatrix euler_rotation(double alpha, double beta, double gamma) {
  return rot_z(alpha) * rot_y(beta) * rot_z(gamma);
}

double optimized_infidelity(const Superoperator &s, int restarts, std::uint64_t seed) {
  if (s.dim() != 2) throw std::invalid_argument("optimized_infidelity: only d = 2 is supported");
  if (restarts < 1) throw std::invalid_argument("optimized_infidelity: restarts must be >= 1");

  // For d = 2 the Liouville matrix of a unitary is 1 (+) O with O in SO(3),
  // and r(V o E o U) only needs Tr(E L_U L_V).
  const RMatrix &e = s.matrix();
  const Eigen::Matrix3d unital = e.block(1, 1, 3, 3);
  const double e11 = e(0, 0);
  auto objective = [&](const RVector &x) {
    const Eigen::Matrix3d o = euler_rotation(x(0), x(1), x(2)) * euler_rotation(x(3), x(4), x(5));
    const double trace = e11 + (unital * o).trace();
    return 1.0 - (trace + 2.0) / 6.0;
  };

  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  double best = objective(RVector::Zero(6));
  for (int restart = 0; restart < restarts; ++restart) {
    RVector x0 = RVector::Zero(6);
    if (restart > 0) {
      for (int i = 0; i < 6; ++i) x0(i) = angle(engine);
    }
    const auto result = optimize::nelder_mead(objective, x0);
    best = std::min(best, result.value);
  }
  return best;
}

double optimized_infidelity_lower_bound(const Superoperator &s) {
  const double d = s.dim();
  return (d - 1.0) / d * (1.0 - std::sqrt(std::max(0.0, unitarity(s))));
}

MMatrix m_matrix(const Superoperator &s) {
  const auto blocks = block_decompose(s);
  const double n = dim_sq_minus_one(s);
  MMatrix m;
  m.m11 = blocks.survival * blocks.survival;
  m.m12 = blocks.sdl.squaredNorm() / std::sqrt(n);
  m.m21 = blocks.nonunital.squaredNorm() / std::sqrt(n);
  m.m22 = blocks.unital_block.squaredNorm() / n;
  return m;
}

std::pair<double, double> decay_eigenvalues(const MMatrix &m) {
  double disc = (m.m11 - m.m22) * (m.m11 - m.m22) + 4.0 * m.m12 * m.m21;
  if (disc < -tol::kEquality) {
    throw std::domain_error("decay_eigenvalues: negative discriminant (non-physical input)");
  }
  disc = std::sqrt(std::max(0.0, disc));
  const double mean = 0.5 * (m.m11 + m.m22);
  return {mean + 0.5 * disc, mean - 0.5 * disc};
}

CMatrix swap_operator(int d) {
  CMatrix s = CMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) s(j * d + i, i * d + j) = 1.0;
  }
  return s;
}

RVector two_copy_vector(const OperatorBasis &basis, const CMatrix &op) {
  const int n = basis.size();
  const int d = basis.dim;
  if (op.rows() != d * d || op.cols() != d * d) {
    throw std::invalid_argument("two_copy_vector: operator must be d^2 x d^2");
  }
  RVector out(n * n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const CMatrix element = kron(basis.elements[k], basis.elements[l]);
      out(k * n + l) = hs_inner(element, op).real();
    }
  }
  return out;
}

InvariantBasis invariant_basis(const BasisPtr &basis) {
  const int d = basis->dim;
  const double dd = d;
  const CMatrix id = CMatrix::Identity(d * d, d * d);
  InvariantBasis out;
  out.b1 = id / dd;
  out.b2 = (swap_operator(d) - id / dd) / std::sqrt(dd * dd - 1.0);
  out.v1 = two_copy_vector(*basis, out.b1);
  out.v2 = two_copy_vector(*basis, out.b2);
  return out;
}

ProbeStates probe_states(int d) {
  const double dd = d;
  const CMatrix id = CMatrix::Identity(d * d, d * d);
  const CMatrix swap = swap_operator(d);
  ProbeStates out;
  out.e_s = 0.5 * (id + swap);
  out.e_a = 0.5 * (id - swap);
  out.pi_s = (id + swap) / (dd * (dd + 1.0));
  out.pi_a = (id - swap) / (dd * (dd - 1.0));
  return out;
}

std::pair<double, double> probe_probabilities(const Superoperator &s) {
  const auto blocks = block_decompose(s);
  const double d = s.dim();
  const double contrast = blocks.survival * blocks.survival - unitarity(s);
  const double n2 = blocks.nonunital.squaredNorm();
  const double sdl2 = blocks.sdl.squaredNorm();
  const double p_as = (d - 1.0) / (2.0 * d) * (contrast - n2 / (d - 1.0) + sdl2 / (d + 1.0));
  const double p_sa = (d + 1.0) / (2.0 * d) * (contrast + n2 / (d + 1.0) - sdl2 / (d - 1.0));
  return {p_as, p_sa};
}

std::pair<double, double> probe_probabilities_contracted(const Superoperator &s) {
  const auto &basis = s.basis();
  const auto inv = invariant_basis(s.basis_ptr());
  const RMatrix projector = inv.projector();
  const RMatrix averaged = projector * kron(s.matrix(), s.matrix()) * projector;
  const auto probes = probe_states(s.dim());
  const double p_as = two_copy_vector(basis, probes.e_a).dot(averaged * two_copy_vector(basis, probes.pi_s));
  const double p_sa = two_copy_vector(basis, probes.e_s).dot(averaged * two_copy_vector(basis, probes.pi_a));
  return {p_as, p_sa};
}

NormBoundReport check_norm_bounds(const Superoperator &s) {
  const auto blocks = block_decompose(s);
  const double d = s.dim();
  const double u = unitarity(s);
  const double bound = 0.5 * (d * d - 1.0) * (blocks.survival * blocks.survival - u);
  NormBoundReport report;
  report.nonunital_residual = bound - blocks.nonunital.squaredNorm();
  report.sdl_residual = bound - blocks.sdl.squaredNorm();
  report.tp = is_trace_preserving(s);
  if (report.tp) report.tp_residual = (d - 1.0) * (1.0 - u) - blocks.nonunital.squaredNorm();
  report.passed = report.nonunital_residual >= -tol::kEquality &&
                  report.sdl_residual >= -tol::kEquality &&
                  (!report.tp || report.tp_residual >= -tol::kEquality);
  return report;
}

InfidelityChainReport check_infidelity_chain(const Superoperator &s, int restarts,
                                             double tolerance) {
  const double d = s.dim();
  InfidelityChainReport report;
  report.unitarity = unitarity(s);
  report.infidelity = average_infidelity(s);
  report.optimized_infidelity = optimized_infidelity(s, restarts);
  const double scale = d / (d - 1.0);
  const double optimized_term = std::pow(1.0 - scale * report.optimized_infidelity, 2);
  const double plain_term = std::pow(1.0 - scale * report.infidelity, 2);
  report.first_residual = report.unitarity - optimized_term;
  report.second_residual = optimized_term - plain_term;
  report.second_applicable = report.infidelity <= (d - 1.0) / d;
  report.passed = report.first_residual >= -tolerance &&
                  (!report.second_applicable || report.second_residual >= -tolerance);
  return report;
}

JamiolkowskiReport check_jamiolkowski_identity(const KrausChannel &channel) {
  const Superoperator s = kraus_to_liouville(channel);
  const auto blocks = block_decompose(s);
  const double d = channel.dim();
  JamiolkowskiReport report;
  report.lhs = d * d * jamiolkowski(channel).purity();
  report.rhs = blocks.survival * blocks.survival + blocks.sdl.squaredNorm() +
               blocks.nonunital.squaredNorm() + (d * d - 1.0) * unitarity(s);
  report.residual = std::abs(report.lhs - report.rhs);
  report.passed = report.residual < tol::kStructural;
  return report;
}

double composition_unitarity(const Superoperator &first, const Superoperator &second) {
  return unitarity(compose(second, first));
}

ChannelReport channel_report(const KrausChannel &channel, int restarts) {
  const Superoperator s = kraus_to_liouville(channel);
  ChannelReport report;
  report.d = channel.dim();
  report.unitarity = unitarity(s);
  report.survival = survival_rate(s);
  report.infidelity = average_infidelity(s, &report.warnings);
  const auto [plus, minus] = decay_eigenvalues(m_matrix(s));
  report.lambda_plus = plus;
  report.lambda_minus = minus;
  report.norm_bounds = check_norm_bounds(s);
  if (report.d == 2) {
    report.chain = check_infidelity_chain(s, restarts);
    report.optimized_infidelity_upper = report.chain.optimized_infidelity;
  } else {
    report.optimized_infidelity_upper = report.infidelity;
    report.warnings.push_back("optimized infidelity is only searched for d = 2; reporting r");
  }
  report.jamiolkowski_residual = check_jamiolkowski_identity(channel).residual;
  return report;
}

}  // namespace unitarity
