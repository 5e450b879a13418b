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

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "unitarity/design.hpp"
#include "unitarity/ensembles.hpp"
#include "unitarity/metrics.hpp"

namespace unitarity {
namespace {

Superoperator L(const KrausChannel &c) { return kraus_to_liouville(c); }

std::vector<KrausChannel> random_channels(int count, std::uint64_t seed, double scale_trace_decreasing = 1.0) {
  RngStream rng(seed, {42});
  std::vector<KrausChannel> out;
  for (int i = 0; i < count; ++i) {
    KrausChannel c = bruzda_channel(2, 1 + i % 4, rng);
    if (scale_trace_decreasing != 1.0 && i % 3 == 0) c = c.scaled(scale_trace_decreasing);
    out.push_back(c);
  }
  return out;
}

// Two-copy swap built from basis kets, independent of the library.
CMatrix swap4() {
  CMatrix s = CMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s(a * 2 + b, b * 2 + a) = 1.0;
  return s;
}

// Tr(E (E (x) E)(rho)) with the two-copy channel applied through Kraus products.
double two_copy_probability(const KrausChannel &c, const CMatrix &effect, const CMatrix &rho) {
  CMatrix out = CMatrix::Zero(4, 4);
  for (const auto &a : c.ops())
    for (const auto &b : c.ops()) {
      const CMatrix k = kron(a, b);
      out += k * rho * k.adjoint();
    }
  return (effect * out).trace().real();
}

TEST(Unitarity, NamedChannels) {
  EXPECT_NEAR(unitarity(L(identity_channel(2))), 1.0, 1e-12);
  EXPECT_NEAR(unitarity(L(depolarizing(2, 0.1))), 0.81, 1e-12);
  EXPECT_NEAR(unitarity(L(state_prep_channel())), 0.0, 1e-12);
  EXPECT_NEAR(unitarity(scale(adjoint_channel(L(state_prep_channel())), 0.5)), 0.0, 1e-12);
  EXPECT_NEAR(unitarity(L(reset_channel(0.003))), 0.994009, 1e-12);
}

TEST(Unitarity, MatchesHaarIntegral) {
  const auto mc = oracle::haar_unitarity(reset_channel(0.003).ops(), 2, 100000, 2024);
  const double u = unitarity(L(reset_channel(0.003)));
  EXPECT_NEAR(mc.mean, u, 5e-4);
  EXPECT_NEAR(mc.mean, u, 3 * mc.error + 1e-12);

  for (const auto &c : random_channels(6, 3, 0.7)) {
    const auto e = oracle::haar_unitarity(c.ops(), 2, 20000, 99);
    EXPECT_NEAR(e.mean, unitarity(L(c)), 3 * e.error + 1e-12);
  }
}

TEST(Unitarity, TwoQubitHaarIntegral) {
  RngStream rng(5, {7});
  const KrausChannel c = bruzda_channel(4, 2, rng);
  const auto e = oracle::haar_unitarity(c.ops(), 4, 20000, 77);
  EXPECT_NEAR(e.mean, unitarity(L(c)), 3 * e.error);
}

TEST(Unitarity, RangeAndEqualityCase) {
  RngStream rng(6, {1});
  for (int i = 0; i < 200; ++i) {
    EXPECT_NEAR(unitarity(L(unitary_channel(haar_unitary(2, rng)))), 1.0, 1e-12);
  }
  for (const auto &c : random_channels(1000, 7, 0.6)) {
    const double u = unitarity(L(c));
    EXPECT_GE(u, -1e-12);
    EXPECT_LE(u, 1.0 + 1e-12);
    if (c.ops().size() > 1 || !c.trace_preserving()) EXPECT_LT(u, 1.0 - 1e-9);
  }
}

TEST(Unitarity, InvariantUnderUnitaryFrames) {
  RngStream rng(8, {1});
  for (const auto &c : random_channels(20, 9, 0.8)) {
    const KrausChannel u = unitary_channel(haar_unitary(2, rng));
    const KrausChannel v = unitary_channel(haar_unitary(2, rng));
    EXPECT_NEAR(unitarity(L(compose(v, compose(c, u)))), unitarity(L(c)), 1e-12);
  }
}

TEST(Survival, TracePreservingAndScaled) {
  for (const auto &c : random_channels(10, 10)) {
    EXPECT_NEAR(survival_rate(L(c)), 1.0, 1e-12);
    EXPECT_NEAR(survival_rate(L(c.scaled(0.7))), 0.7, 1e-12);
  }
}

TEST(Survival, FilterMatchesHaarIntegral) {
  const auto e = oracle::haar_survival(filter_channel().ops(), 2, 100000, 5);
  EXPECT_NEAR(survival_rate(L(filter_channel())), 0.5, 1e-12);
  EXPECT_NEAR(e.mean, 0.5, 3 * e.error);
}

TEST(Infidelity, ClosedFormValues) {
  EXPECT_NEAR(average_infidelity(L(identity_channel(2))), 0.0, 1e-12);
  EXPECT_NEAR(average_infidelity(L(depolarizing(2, 0.1))), 0.05, 1e-12);
  for (double p : {0.0, 0.3, 1.0}) EXPECT_NEAR(average_infidelity(L(depolarizing(4, p))), p * 3.0 / 4.0, 1e-12);
  EXPECT_NEAR(average_infidelity(L(rotation_unitary({1, 0, 0}, 0.1))), 2.0 / 3.0 * std::pow(std::sin(0.05), 2),
              1e-12);
}

TEST(Infidelity, MatchesHaarIntegral) {
  const auto dep = oracle::haar_infidelity(depolarizing(2, 0.1).ops(), 2, 50000, 11);
  EXPECT_NEAR(dep.mean, 0.05, 3 * dep.error);
  for (const auto &c : random_channels(8, 12)) {
    const auto e = oracle::haar_infidelity(c.ops(), 2, 20000, 13);
    EXPECT_NEAR(e.mean, average_infidelity(L(c)), 3 * e.error);
  }
}

TEST(Infidelity, WarnsForTraceDecreasing) {
  std::vector<std::string> warnings;
  average_infidelity(L(filter_channel()), &warnings);
  EXPECT_FALSE(warnings.empty());
  warnings.clear();
  average_infidelity(L(depolarizing(2, 0.2)), &warnings);
  EXPECT_TRUE(warnings.empty());
}

TEST(OptimizedInfidelity, UnitaryAndDepolarizing) {
  RngStream rng(14, {1});
  EXPECT_NEAR(optimized_infidelity(L(unitary_channel(haar_unitary(2, rng)))), 0.0, 1e-8);
  for (double p : {0.05, 0.2}) {
    const Superoperator s = L(depolarizing(2, p));
    EXPECT_NEAR(optimized_infidelity(s), average_infidelity(s), 1e-8);
  }
}

TEST(OptimizedInfidelity, MatchesKabschClosedForm) {
  for (const auto &c : random_channels(30, 15)) {
    const Superoperator s = L(c);
    const double expected = oracle::kabsch_optimized_infidelity(oracle::qubit_liouville(c.ops()));
    EXPECT_NEAR(optimized_infidelity(s), expected, 1e-7);
  }
}

TEST(OptimizedInfidelity, BracketedByBounds) {
  for (const auto &c : random_channels(50, 16)) {
    const Superoperator s = L(c);
    const double big_r = optimized_infidelity(s, 5);
    EXPECT_LE(big_r, average_infidelity(s) + 1e-12);
    EXPECT_GE(big_r, optimized_infidelity_lower_bound(s) - 1e-10);
    EXPECT_NEAR(optimized_infidelity_lower_bound(s), 0.5 * (1.0 - std::sqrt(unitarity(s))), 1e-14);
  }
}

TEST(EulerRotation, IsSpecialOrthogonal) {
  const RMatrix r = euler_rotation(0.3, -1.1, 2.0);
  EXPECT_LT((r * r.transpose() - RMatrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
}

TEST(MMatrix, NamedChannels) {
  const MMatrix dep = m_matrix(L(depolarizing(2, 0.1)));
  EXPECT_NEAR(dep.m11, 1.0, 1e-12);
  EXPECT_NEAR(dep.m12, 0.0, 1e-12);
  EXPECT_NEAR(dep.m21, 0.0, 1e-12);
  EXPECT_NEAR(dep.m22, 0.81, 1e-12);

  const MMatrix e0 = m_matrix(L(state_prep_channel()));
  EXPECT_NEAR(e0.m11, 1.0, 1e-12);
  EXPECT_NEAR(e0.m12, 0.0, 1e-12);
  EXPECT_NEAR(e0.m21, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(e0.m22, 0.0, 1e-12);

  // Filter: Liouville blocks from the bare-Pauli oracle.
  const RMatrix l = oracle::qubit_liouville(filter_channel().ops());
  const MMatrix f = m_matrix(L(filter_channel()));
  EXPECT_NEAR(f.m11, l(0, 0) * l(0, 0), 1e-12);
  EXPECT_NEAR(f.m12, l.row(0).tail(3).squaredNorm() / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(f.m21, l.col(0).tail(3).squaredNorm() / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(f.m22, l.bottomRightCorner(3, 3).squaredNorm() / 3.0, 1e-12);
  EXPECT_NEAR(f.m11, 0.25, 1e-12);
}

TEST(MMatrix, EntriesMatchBlockNorms) {
  for (const auto &c : random_channels(100, 17, 0.5)) {
    const Superoperator s = L(c);
    const auto b = block_decompose(s);
    const MMatrix m = m_matrix(s);
    EXPECT_NEAR(m.m11, b.survival * b.survival, 1e-10);
    EXPECT_NEAR(m.m12, b.sdl.squaredNorm() / std::sqrt(3.0), 1e-10);
    EXPECT_NEAR(m.m21, b.nonunital.squaredNorm() / std::sqrt(3.0), 1e-10);
    EXPECT_NEAR(m.m22, unitarity(s), 1e-10);
  }
}

TEST(DecayEigenvalues, Examples) {
  const auto [p, q] = decay_eigenvalues(m_matrix(L(depolarizing(2, 0.1))));
  EXPECT_NEAR(p, 1.0, 1e-12);
  EXPECT_NEAR(q, 0.81, 1e-12);
  const auto [a, b] = decay_eigenvalues(m_matrix(L(state_prep_channel())));
  EXPECT_NEAR(a, 1.0, 1e-12);
  EXPECT_NEAR(b, 0.0, 1e-12);
  MMatrix diag;
  diag.m11 = diag.m22 = 0.4;
  const auto [c, d] = decay_eigenvalues(diag);
  EXPECT_NEAR(c, 0.4, 1e-15);
  EXPECT_NEAR(d, 0.4, 1e-15);
}

TEST(DecayEigenvalues, SumRuleAndSpectrum) {
  for (const auto &c : random_channels(200, 18, 0.6)) {
    const Superoperator s = L(c);
    const MMatrix m = m_matrix(s);
    const auto [lp, lm] = decay_eigenvalues(m);
    const double sv = survival_rate(s);
    EXPECT_NEAR(lp + lm, sv * sv + unitarity(s), 1e-12);
    EXPECT_GE(lp, lm);
    const Eigen::Vector2cd ev = m.matrix().eigenvalues();
    const double hi = std::max(ev(0).real(), ev(1).real());
    EXPECT_NEAR(hi, lp, 1e-10);
  }
}

TEST(DecayEigenvalues, RejectsNonPhysical) {
  MMatrix bad;
  bad.m12 = 1.0;
  bad.m21 = -1.0;
  EXPECT_THROW(decay_eigenvalues(bad), std::domain_error);
}

TEST(InvariantBasis, OrthonormalAndUnitarilyInvariant) {
  const auto basis = pauli_basis(1);
  const InvariantBasis inv = invariant_basis(basis);
  EXPECT_NEAR(hs_inner(inv.b1, inv.b1).real(), 1.0, 1e-12);
  EXPECT_NEAR(hs_inner(inv.b2, inv.b2).real(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(hs_inner(inv.b1, inv.b2)), 0.0, 1e-12);
  EXPECT_LT((swap_operator(2) - swap4()).norm(), 1e-15);
  EXPECT_LT((inv.v1 - two_copy_vector(*basis, inv.b1)).norm(), 1e-12);
  EXPECT_LT((inv.v2 - two_copy_vector(*basis, inv.b2)).norm(), 1e-12);

  std::mt19937_64 gen(19);
  for (int t = 0; t < 10; ++t) {
    const CMatrix u = oracle::random_unitary(2, gen);
    const CMatrix uu = kron(u, u);
    const CMatrix b[2] = {inv.b1, inv.b2};
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        EXPECT_NEAR(std::abs(hs_inner(b[j], uu * b[k] * uu.adjoint()) - (j == k ? 1.0 : 0.0)), 0.0, 1e-10);
  }
}

TEST(ProbeStates, AreDensityMatrices) {
  for (int d : {2, 4}) {
    const ProbeStates p = probe_states(d);
    for (const CMatrix *m : {&p.pi_s, &p.pi_a}) {
      EXPECT_NEAR(m->trace().real(), 1.0, 1e-12);
      EXPECT_GT(hermitian_eigensystem(*m).values(0), -1e-12);
    }
    EXPECT_LT((p.e_s * p.e_s - p.e_s).norm(), 1e-12);
    EXPECT_LT((p.e_a * p.e_a - p.e_a).norm(), 1e-12);
  }
}

TEST(ProbeProbabilities, NamedChannels) {
  const auto [a0, s0] = probe_probabilities(L(identity_channel(2)));
  EXPECT_NEAR(a0, 0.0, 1e-12);
  EXPECT_NEAR(s0, 0.0, 1e-12);
  const auto [a1, s1] = probe_probabilities(L(depolarizing(2, 0.1)));
  EXPECT_NEAR(a1, 0.25 * (1.0 - 0.81), 1e-12);
  (void)s1;
}

TEST(ProbeProbabilities, MatchExplicitTwoCopyContraction) {
  // The probes and effects lie in the invariant span, so the twirl drops out
  // and the probability is Tr(E (E (x) E)(Pi)).
  const CMatrix s = swap4();
  const CMatrix id = CMatrix::Identity(4, 4);
  const CMatrix pi_s = (id + s) / 6.0, pi_a = (id - s) / 2.0;
  const CMatrix e_s = (id + s) / 2.0, e_a = (id - s) / 2.0;
  for (const auto &c : random_channels(100, 20, 0.7)) {
    const auto [p_as, p_sa] = probe_probabilities(L(c));
    const auto [c_as, c_sa] = probe_probabilities_contracted(L(c));
    EXPECT_NEAR(p_as, two_copy_probability(c, e_a, pi_s), 1e-10);
    EXPECT_NEAR(p_sa, two_copy_probability(c, e_s, pi_a), 1e-10);
    EXPECT_NEAR(p_as, c_as, 1e-10);
    EXPECT_NEAR(p_sa, c_sa, 1e-10);
    EXPECT_GE(p_as, -1e-12);
    EXPECT_LE(p_as, 1.0 + 1e-12);
    EXPECT_GE(p_sa, -1e-12);
    EXPECT_LE(p_sa, 1.0 + 1e-12);
  }
}

TEST(NormBounds, NamedChannels) {
  const auto id = check_norm_bounds(L(identity_channel(2)));
  EXPECT_NEAR(id.nonunital_residual, 0.0, 1e-12);
  EXPECT_NEAR(id.sdl_residual, 0.0, 1e-12);
  EXPECT_TRUE(id.passed);
  const auto e0 = check_norm_bounds(L(state_prep_channel()));
  EXPECT_TRUE(e0.tp);
  EXPECT_NEAR(e0.tp_residual, 0.0, 1e-12);  // saturated: ||n||^2 = 1 = (d-1)(1-0)
  EXPECT_TRUE(e0.passed);
}

TEST(NormBounds, RandomChannelsNeverViolate) {
  for (const auto &c : random_channels(1000, 21, 0.6)) {
    const auto r = check_norm_bounds(L(c));
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.nonunital_residual, -1e-12);
    EXPECT_GE(r.sdl_residual, -1e-12);
    if (r.tp) EXPECT_GE(r.tp_residual, -1e-12);
  }
}

TEST(InfidelityChain, DepolarizingSaturates) {
  for (double p : {0.01, 0.1, 0.4}) {
    const Superoperator s = L(depolarizing(2, p));
    const auto r = check_infidelity_chain(s);
    EXPECT_NEAR(unitarity(s), std::pow(1.0 - 2.0 * average_infidelity(s), 2), 1e-12);
    EXPECT_NEAR(r.second_residual, 0.0, 1e-8);
    EXPECT_NEAR(r.first_residual, 0.0, 1e-8);
    EXPECT_TRUE(r.passed);
  }
}

TEST(InfidelityChain, UnitarySaturatesAtOne) {
  RngStream rng(22, {1});
  const auto r = check_infidelity_chain(L(unitary_channel(haar_unitary(2, rng))));
  EXPECT_NEAR(r.unitarity, 1.0, 1e-12);
  EXPECT_NEAR(r.optimized_infidelity, 0.0, 1e-8);
  EXPECT_NEAR(r.first_residual, 0.0, 1e-8);
  EXPECT_TRUE(r.passed);
}

TEST(InfidelityChain, RandomChannels) {
  for (const auto &c : random_channels(100, 23)) {
    const auto r = check_infidelity_chain(L(c), 20);
    EXPECT_GE(r.first_residual, -1e-8);
    if (r.second_applicable) EXPECT_GE(r.second_residual, -1e-8);
    EXPECT_TRUE(r.passed);
  }
}

TEST(Jamiolkowski, IdentityAndStatePrep) {
  const auto id = check_jamiolkowski_identity(identity_channel(2));
  EXPECT_NEAR(id.lhs, 4.0, 1e-12);
  EXPECT_NEAR(id.rhs, 4.0, 1e-12);
  const auto e0 = check_jamiolkowski_identity(state_prep_channel());
  EXPECT_NEAR(e0.lhs, 2.0, 1e-12);
  EXPECT_NEAR(e0.rhs, 2.0, 1e-12);
}

TEST(Jamiolkowski, RandomChannelsAllRanks) {
  double worst = 0.0;
  for (const auto &c : random_channels(1000, 24, 0.5)) {
    const auto r = check_jamiolkowski_identity(c);
    worst = std::max(worst, std::abs(r.residual));
    EXPECT_TRUE(r.passed);
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(CompositionUnitarity, NonMonotoneWitness) {
  const Superoperator e0 = L(state_prep_channel());
  const Superoperator half_adjoint = scale(adjoint_channel(e0), 0.5);
  // Oracle: 0.5 * L0 L0^T built from bare Paulis.
  const RMatrix l0 = oracle::qubit_liouville(state_prep_channel().ops());
  const RMatrix composed = 0.5 * l0 * l0.transpose();
  const double expected = composed.bottomRightCorner(3, 3).squaredNorm() / 3.0;
  EXPECT_NEAR(expected, 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(composition_unitarity(half_adjoint, e0), expected, 1e-12);
}

TEST(CompositionUnitarity, EqualsUnitarityOfProduct) {
  const auto cs = random_channels(20, 25);
  for (std::size_t i = 0; i + 1 < cs.size(); i += 2) {
    EXPECT_NEAR(composition_unitarity(L(cs[i]), L(cs[i + 1])), unitarity(L(compose(cs[i + 1], cs[i]))), 1e-12);
  }
}

TEST(ChannelReport, Depolarizing) {
  const ChannelReport r = channel_report(depolarizing(2, 0.1));
  EXPECT_EQ(r.d, 2);
  EXPECT_NEAR(r.unitarity, 0.81, 1e-12);
  EXPECT_NEAR(r.infidelity, 0.05, 1e-12);
  EXPECT_NEAR(r.survival, 1.0, 1e-12);
  EXPECT_NEAR(r.lambda_plus, 1.0, 1e-12);
  EXPECT_NEAR(r.lambda_minus, 0.81, 1e-12);
  EXPECT_TRUE(r.norm_bounds.passed);
  EXPECT_TRUE(r.chain.passed);
  EXPECT_LT(r.jamiolkowski_residual, 1e-10);
  EXPECT_TRUE(r.warnings.empty());
}

}  // namespace
}  // namespace unitarity
