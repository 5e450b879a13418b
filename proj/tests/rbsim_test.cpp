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

#include <atomic>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "unitarity/fitmodel.hpp"
#include "unitarity/metrics.hpp"
#include "unitarity/rbsim.hpp"

namespace unitarity {
namespace {

CMatrix ket0() {
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  return p;
}

// Density-matrix propagation: first gate noiseless, every later gate preceded by the noise.
double propagate_density(const CMatrix &q, const Sequence &seq, const CMatrix &rho, const KrausChannel &noise,
                         const GateSet &gates) {
  CMatrix state = rho;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) state = oracle::apply_kraus(noise.ops(), state);
    const CMatrix &g = gates[seq[i]];
    state = g * state * g.adjoint();
  }
  return (q * state).trace().real();
}

double enumerate_squares(int m, const CMatrix &q, const CMatrix &rho, const KrausChannel &noise,
                         const GateSet &gates) {
  const std::size_t n = gates.size();
  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= n;
  double sum = 0.0;
  Sequence seq(m);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int i = 0; i < m; ++i, rest /= n) seq[i] = rest % n;
    sum += std::pow(propagate_density(q, seq, rho, noise, gates), 2);
  }
  return sum / static_cast<double>(total);
}

ProtocolConfig quiet_config(const KrausChannel &noise) {
  ProtocolConfig c;
  c.noise = noise;
  c.spam.enabled = false;
  c.workers = 2;
  return c;
}

TEST(SampleSequence, LengthRangeAndDeterminism) {
  RngStream a(1, {2}), b(1, {2});
  EXPECT_EQ(sample_sequence(1, 24, a).size(), 1u);
  const Sequence s = sample_sequence(50, 24, a);
  for (auto x : s) EXPECT_LT(x, 24u);
  sample_sequence(1, 24, b);
  EXPECT_EQ(sample_sequence(50, 24, b), s);
  EXPECT_THROW(sample_sequence(0, 24, a), std::invalid_argument);
}

TEST(SampleSequence, ChiSquareUniformity) {
  RngStream rng(3, {1});
  std::vector<int> counts(24, 0);
  const Sequence s = sample_sequence(100000, 24, rng);
  for (auto x : s) ++counts[x];
  const double expected = 100000.0 / 24.0;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 49.73);  // 0.999 quantile with 23 degrees of freedom
}

TEST(ExactExpectation, IdealCases) {
  const GateSet g = clifford_1q();
  std::size_t id_index = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (equal_up_to_phase(g[i], CMatrix::Identity(2, 2))) id_index = i;
  EXPECT_NEAR(exact_expectation(pauli(3), {id_index}, ket0(), identity_channel(2), g), 1.0, 1e-12);

  RngStream rng(4, {1});
  for (int t = 0; t < 10; ++t) {
    const Sequence seq = sample_sequence(6, g.size(), rng);
    CMatrix u = CMatrix::Identity(2, 2);
    for (auto j : seq) u = g[j] * u;
    const double expected = (pauli(1) * u * ket0() * u.adjoint()).trace().real();
    EXPECT_NEAR(exact_expectation(pauli(1), seq, ket0(), identity_channel(2), g), expected, 1e-12);
  }
}

TEST(ExactExpectation, MatchesDensityPropagation) {
  const GateSet g = clifford_1q();
  RngStream rng(5, {1});
  for (int t = 0; t < 20; ++t) {
    const KrausChannel noise = bruzda_channel(2, 1 + t % 4, rng);
    const Sequence seq = sample_sequence(1 + t, g.size(), rng);
    const CMatrix q = pauli(1 + t % 3);
    EXPECT_NEAR(exact_expectation(q, seq, ket0(), noise, g), propagate_density(q, seq, ket0(), noise, g), 1e-12);
  }
}

TEST(ExactExpectation, GateDependentNoiseFollowsEachGate) {
  const GateSet g = clifford_1q();
  RngStream rng(6, {1});
  const auto gd = eigenvalue_perturbed_gates(g.unitaries(), 0.05, rng).after(reset_channel(0.02));
  const Sequence seq = sample_sequence(7, g.size(), rng);
  CMatrix state = ket0();
  for (auto j : seq) {
    state = oracle::apply_kraus(gd.errors[j].ops(), state);
    state = g[j] * state * g[j].adjoint();
  }
  EXPECT_NEAR(exact_expectation(pauli(3), seq, ket0(), gd, g), (pauli(3) * state).trace().real(), 1e-12);
}

TEST(SimulateShots, DeterministicLimitsAndErrors) {
  RngStream rng(7, {1});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(simulate_shots(1.0, 150, rng), 1.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(simulate_shots(-1.0, 150, rng), -1.0);
  EXPECT_THROW(simulate_shots(1.1, 10, rng), std::domain_error);
  EXPECT_NO_THROW(simulate_shots(1.0 + 1e-13, 10, rng));
}

TEST(SimulateShots, MeanAndVariance) {
  RngStream rng(8, {1});
  for (double mu : {0.0, 0.4, -0.7}) {
    std::vector<double> x;
    for (int i = 0; i < 10000; ++i) x.push_back(simulate_shots(mu, 150, rng));
    const auto [mean, var] = oracle::mean_var(x);
    const double theory_var = (1.0 - mu * mu) / 150.0;
    EXPECT_NEAR(mean, mu, 3.0 * std::sqrt(theory_var / x.size()));
    // Sample variance standard error is about var * sqrt(2 / K).
    EXPECT_NEAR(var, theory_var, 4.0 * theory_var * std::sqrt(2.0 / x.size()));
  }
}

TEST(UnbiasedSquare, ArithmeticAndErrors) {
  EXPECT_DOUBLE_EQ(unbiased_square(1.0, 150), 1.0);
  EXPECT_DOUBLE_EQ(unbiased_square(-1.0, 150), 1.0);
  EXPECT_DOUBLE_EQ(unbiased_square(0.0, 150), -1.0 / 149.0);
  EXPECT_THROW(unbiased_square(0.5, 1), std::invalid_argument);
}

TEST(UnbiasedSquare, UnbiasedForTwoOutcomes) {
  RngStream rng(9, {1});
  std::vector<double> x;
  for (int i = 0; i < 100000; ++i) x.push_back(unbiased_square(simulate_shots(0.6, 150, rng), 150));
  const auto [mean, var] = oracle::mean_var(x);
  EXPECT_NEAR(mean, 0.36, 4.0 * std::sqrt(var / x.size()));
}

TEST(UnbiasedSquare, UnbiasedForLossyOutcomes) {
  // +1 w.p. (t + e)/2, -1 w.p. (t - e)/2, lost otherwise.
  RngStream rng(10, {1});
  const double t = 0.8, e = 0.5;
  std::vector<double> means, squares, fractions;
  for (int i = 0; i < 100000; ++i) {
    const ShotSample s = simulate_shots_lossy(e, t, 50, rng);
    means.push_back(s.mean);
    fractions.push_back(s.detected_fraction);
    squares.push_back(unbiased_square(s.mean, 50, s.detected_fraction));
  }
  const auto [m1, v1] = oracle::mean_var(means);
  const auto [f, vf] = oracle::mean_var(fractions);
  const auto [sq, vsq] = oracle::mean_var(squares);
  EXPECT_NEAR(m1, e, 3.0 * std::sqrt(v1 / means.size()));
  EXPECT_NEAR(f, t, 3.0 * std::sqrt(vf / fractions.size()));
  EXPECT_NEAR(sq, e * e, 3.0 * std::sqrt(vsq / squares.size()));
}

TEST(Spam, RealizationStaysPhysical) {
  const auto ideal = default_observables(2);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SpamModel model;
    model.prep_angle = 0.3;
    model.meas_angle = 0.3;
    const SpamRealization s = realize_spam(model, ket0(), ideal, RngStream(seed, {5}));
    EXPECT_NEAR(s.rho.trace().real(), 1.0, 1e-12);
    EXPECT_NEAR((s.rho * s.rho).trace().real(), 1.0, 1e-12);
    ASSERT_EQ(s.observables.size(), 3u);
    for (const auto &q : s.observables) {
      // Effect (1 + Q)/2 must have spectrum in [0, 1].
      const RVector ev = hermitian_eigensystem(0.5 * (CMatrix::Identity(2, 2) + q)).values;
      EXPECT_GE(ev(0), -1e-10);
      EXPECT_LE(ev(1), 1.0 + 1e-10);
    }
  }
  SpamModel off;
  off.enabled = false;
  const SpamRealization s = realize_spam(off, ket0(), ideal, RngStream(1, {5}));
  EXPECT_TRUE(s.rho == ket0());
  EXPECT_TRUE(s.observables[0] == ideal[0]);
}

TEST(Spam, MeasurementScalingRange) {
  SpamModel model;
  model.meas_angle = 0.0;
  model.prep_angle = 0.0;
  const auto ideal = default_observables(2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SpamRealization s = realize_spam(model, ket0(), ideal, RngStream(seed, {5}));
    for (std::size_t k = 0; k < ideal.size(); ++k) {
      const double ratio = hs_inner(ideal[k], s.observables[k]).real() / hs_inner(ideal[k], ideal[k]).real();
      EXPECT_GE(ratio, 0.95 - 1e-12);
      EXPECT_LE(ratio, 1.0 + 1e-12);
    }
  }
}

TEST(DefaultObservables, ArePaulis) {
  const auto obs = default_observables(2);
  ASSERT_EQ(obs.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_LT((obs[k] - pauli(k + 1)).norm(), 1e-12);
}

TEST(PurityEstimate, ExactLimits) {
  ProtocolConfig c = quiet_config(identity_channel(2));
  c.exact_expectations = true;
  RngStream rng(11, {1});
  const Sequence seq = sample_sequence(5, 24, rng);
  EXPECT_NEAR(purity_estimate(seq, c, rng), 1.0, 1e-12);

  c.noise = depolarizing(2, 1.0);
  EXPECT_NEAR(purity_estimate(seq, c, rng), 0.0, 1e-12);
}

TEST(PurityEstimate, BlochNormInExpectation) {
  // The estimate is an unbiased sum of squared Pauli expectations.
  ProtocolConfig c = quiet_config(reset_channel(0.05));
  c.shots = 20;
  const ProtocolSimulator sim(c);
  RngStream srng(12, {1});
  const Sequence seq = sample_sequence(8, 24, srng);
  const RVector state = sim.final_state(seq);
  const double expected = 2.0 * state.tail(3).squaredNorm();  // sum_k Tr(P_k rho)^2
  std::vector<double> x;
  for (std::uint64_t i = 0; i < 20000; ++i) x.push_back(sim.purity_estimate(seq, RngStream(13, {i})));
  const auto [mean, var] = oracle::mean_var(x);
  EXPECT_NEAR(mean, expected, 3.0 * std::sqrt(var / x.size()));
}

TEST(Protocol, IdentityNoiseExactIsFlatAtOne) {
  ProtocolConfig c = quiet_config(identity_channel(2));
  c.exact_expectations = true;
  c.lengths = {1, 2, 10, 50};
  c.sequences = 5;
  for (const auto &row : run_purity_protocol(c).rows) {
    EXPECT_NEAR(row.mean, 1.0, 1e-12);
    EXPECT_NEAR(row.std_error, 0.0, 1e-12);
  }
}

TEST(Protocol, DatasetShape) {
  ProtocolConfig c;
  c.noise = reset_channel(0.01);
  c.lengths = {1, 3, 7};
  c.sequences = 4;
  c.shots = 10;
  const DecayDataset d = run_purity_protocol(c);
  EXPECT_EQ(d.kind, "purity");
  ASSERT_EQ(d.rows.size(), 3u);
  EXPECT_EQ(d.raw.size(), 12u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(d.rows[i].m, c.lengths[i]);
    EXPECT_EQ(d.rows[i].sequences, 4);
    EXPECT_EQ(d.rows[i].shots, 10);
    EXPECT_GE(d.rows[i].std_error, 0.0);
    EXPECT_TRUE(std::isfinite(d.rows[i].mean));
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) sum += d.raw[i * 4 + j].value;
    EXPECT_NEAR(d.rows[i].mean, sum / 4.0, 1e-15);
  }
}

TEST(Protocol, BitwiseReproducibleAcrossWorkerCounts) {
  ProtocolConfig c;
  c.noise = parse_channel_spec("compose:[reset:0.01,haar:3]");
  c.lengths = {1, 5, 20, 40};
  c.sequences = 12;
  c.shots = 30;
  c.seed = 99;
  c.workers = 1;
  const DecayDataset a = run_purity_protocol(c);
  c.workers = 7;
  const DecayDataset b = run_purity_protocol(c);
  ASSERT_EQ(a.raw.size(), b.raw.size());
  for (std::size_t i = 0; i < a.raw.size(); ++i) EXPECT_EQ(a.raw[i].value, b.raw[i].value);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].std_error, b.rows[i].std_error);
  c.seed = 100;
  EXPECT_NE(run_purity_protocol(c).raw[5].value, a.raw[5].value);
}

TEST(Protocol, ResetNoiseMatchesPredictionAtLength20) {
  ProtocolConfig c;
  c.noise = reset_channel(0.003);
  c.lengths = {20};
  c.sequences = 30;
  c.shots = 150;
  c.seed = 5;
  const DecayDataset d = run_purity_protocol(c);
  const double theory = theoretical_purity_decay(c, c.lengths)[0];
  EXPECT_NEAR(d.rows[0].mean, theory, 3.0 * d.rows[0].std_error);
}

TEST(Protocol, ConvergesToTheoryWithManySamples) {
  ProtocolConfig c;
  c.noise = parse_channel_spec("compose:[reset:0.02,bruzda:2:4]");
  c.lengths = {1, 5, 20};
  c.sequences = 300;
  c.shots = 10000;
  c.seed = 6;
  const DecayDataset d = run_purity_protocol(c);
  const auto theory = theoretical_purity_decay(c, c.lengths);
  for (std::size_t i = 0; i < theory.size(); ++i) {
    EXPECT_NEAR(d.rows[i].mean, theory[i], 3.0 * d.rows[i].std_error) << "m=" << c.lengths[i];
  }
}

TEST(Protocol, SpamChangesConstantsNotRate) {
  ProtocolConfig c;
  c.noise = parse_channel_spec("compose:[reset:0.01,haar:1]");
  c.sequences = 30;
  c.seed = 8;
  c.exact_expectations = true;
  const FitResult a = fit_tp_decay(run_purity_protocol(c));
  c.seed = 9;  // new sequences and a new SPAM realization
  c.spam.prep_angle = 0.2;
  c.spam.meas_angle = 0.2;
  c.spam.scale_min = 0.8;
  const FitResult b = fit_tp_decay(run_purity_protocol(c));
  const auto &ua = a.param("u");
  const auto &ub = b.param("u");
  EXPECT_LT(std::abs(ua.value - ub.value), (ua.ci_high - ua.ci_low) + (ub.ci_high - ub.ci_low));
  EXPECT_GT(std::abs(a.value("A") + a.value("B") - b.value("A") - b.value("B")), 1e-3);
}

TEST(Protocol, GateDependentPerturbationsTrackAverageChannel) {
  const GateSet g = clifford_1q();
  RngStream rng(14, {1});
  const auto gd = eigenvalue_perturbed_gates(g.unitaries(), 0.01, rng).after(reset_channel(0.003));
  ProtocolConfig c;
  c.noise = gd;
  c.seed = 15;
  const FitResult f = fit_tp_decay(run_purity_protocol(c));
  EXPECT_NEAR(f.value("u"), unitarity(gd.average()), 0.003);
}

TEST(Protocol, LossDataFlatForTracePreservingNoise) {
  ProtocolConfig c = quiet_config(reset_channel(0.05));
  c.exact_expectations = true;
  c.lengths = {1, 4, 16, 64};
  c.sequences = 6;
  const DecayDataset d = run_loss_protocol(c);
  EXPECT_EQ(d.kind, "loss");
  for (const auto &row : d.rows) EXPECT_NEAR(row.mean, 1.0, 1e-12);
}

TEST(Protocol, ValidateRejectsBadConfigs) {
  ProtocolConfig c;
  c.lengths = {0, 2};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ProtocolConfig{};
  c.sequences = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ProtocolConfig{};
  c.shots = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ProtocolConfig{};
  c.noise = depolarizing(4, 0.1);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ProtocolConfig{};
  c.observables = {2.0 * pauli(3)};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_NO_THROW(ProtocolConfig{}.validate());
}

TEST(BruteForce, MatchesIndependentEnumeration) {
  const GateSet g = clifford_1q();
  RngStream rng(16, {1});
  const KrausChannel noise = bruzda_channel(2, 3, rng);
  for (int m : {1, 2}) {
    EXPECT_NEAR(brute_force_mean_squares(m, pauli(3), ket0(), noise, g),
                enumerate_squares(m, pauli(3), ket0(), noise, g), 1e-12);
  }
  EXPECT_THROW(brute_force_mean_squares(4, pauli(3), ket0(), noise, g), std::invalid_argument);
}

TEST(BruteForce, FirstMomentOfUnitalNoiseVanishes) {
  // A single-copy 2-design twirl kills traceless observables.
  const GateSet g = clifford_1q();
  EXPECT_NEAR(brute_force_mean(2, pauli(1), ket0(), depolarizing(2, 0.1), g), 0.0, 1e-12);
  EXPECT_NEAR(brute_force_mean(3, CMatrix::Identity(2, 2), ket0(), filter_channel(), g), 0.25, 1e-12);
}

TEST(TheoreticalDecay, MatchesBruteForce) {
  const GateSet g = clifford_1q();
  RngStream rng(17, {1});
  const std::vector<int> lengths{1, 2, 3};
  std::vector<NoiseModel> models{bruzda_channel(2, 2, rng), reset_channel(0.01),
                                 bruzda_channel(2, 4, rng).scaled(0.9)};
  for (const auto &noise : models) {
    const auto full = theoretical_decay(noise, g, pauli(3), ket0(), lengths);
    const auto reduced = theoretical_decay_reduced(average_noise(noise), g, pauli(3), ket0(), lengths);
    for (int m : lengths) {
      const double brute = brute_force_mean_squares(m, pauli(3), ket0(), noise, g);
      EXPECT_NEAR(full[m - 1], brute, 1e-12);
      EXPECT_NEAR(reduced[m - 1], brute, 1e-12);
    }
  }
  const auto gd = eigenvalue_perturbed_gates(g.unitaries(), 0.1, rng).after(reset_channel(0.05));
  const auto gd_curve = theoretical_decay(gd, g, pauli(1), ket0(), {1, 2});
  EXPECT_NEAR(gd_curve[0], brute_force_mean_squares(1, pauli(1), ket0(), gd, g), 1e-12);
  EXPECT_NEAR(gd_curve[1], brute_force_mean_squares(2, pauli(1), ket0(), gd, g), 1e-12);
}

TEST(TheoreticalDecay, UnitaryNoiseIsConstant) {
  const auto curve = theoretical_decay(parse_channel_spec("haar:4"), clifford_1q(), pauli(3), ket0(),
                                       {1, 2, 5, 30, 100});
  for (double v : curve) EXPECT_NEAR(v, curve[0], 1e-12);
}

TEST(TheoreticalDecay, TracePreservingSingleExponential) {
  const GateSet g = clifford_1q();
  RngStream rng(18, {1});
  const KrausChannel noise = bruzda_channel(2, 3, rng);
  const double u = unitarity(kraus_to_liouville(noise));
  std::vector<int> lengths(100);
  for (int m = 1; m <= 100; ++m) lengths[m - 1] = m;
  const auto curve = theoretical_decay(noise, g, pauli(2), ket0(), lengths);
  const double b = (curve[0] - curve[1]) / (1.0 - u);
  const double a = curve[0] - b;
  for (int m = 1; m <= 100; ++m) EXPECT_NEAR(curve[m - 1], a + b * std::pow(u, m - 1), 1e-10);
}

TEST(TheoreticalDecay, TraceDecreasingTwoExponentials) {
  const GateSet g = clifford_1q();
  const KrausChannel noise = compose(filter_channel(), depolarizing(2, 0.2)).scaled(1.0);
  const auto [lp, lm] = decay_eigenvalues(m_matrix(kraus_to_liouville(noise)));
  std::vector<int> lengths(60);
  for (int m = 1; m <= 60; ++m) lengths[m - 1] = m;
  const auto curve = theoretical_decay(noise, g, pauli(3), ket0(), lengths);
  // Solve A, B from m = 1, 2 and check the rest.
  Eigen::Matrix2d sys;
  sys << 1, 1, lp, lm;
  const Eigen::Vector2d ab = sys.colPivHouseholderQr().solve(Eigen::Vector2d(curve[0], curve[1]));
  for (int m = 1; m <= 60; ++m) {
    EXPECT_NEAR(curve[m - 1], ab(0) * std::pow(lp, m - 1) + ab(1) * std::pow(lm, m - 1), 1e-10);
  }
}

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
  for (const auto &h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_GE(default_workers(), 1);
}

}  // namespace
}  // namespace unitarity
