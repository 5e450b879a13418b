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

#include "unitarity/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "unitarity/design.hpp"
#include "unitarity/ensembles.hpp"
#include "unitarity/fitmodel.hpp"
#include "unitarity/metrics.hpp"
#include "unitarity/rbsim.hpp"

namespace unitarity {

namespace {

RngStream verification_stream(const VerifyOptions &o, std::uint64_t criterion) {
  return RngStream(o.seed, {purpose(StreamPurpose::kVerification), criterion});
}

CMatrix ket0_projector(int d) {
  CMatrix p = CMatrix::Zero(d, d);
  p(0, 0) = 1.0;
  return p;
}

CMatrix random_pure_state(int d, RngStream &rng) {
  const CVector psi = haar_unitary(d, rng).col(0);
  return psi * psi.adjoint();
}

CMatrix random_observable(int d, RngStream &rng) {
  CMatrix h = random_hermitian(d, rng);
  const RVector ev = hermitian_eigensystem(h).values;
  return h / std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

// CP trace-decreasing qubit channel: a partial filter diag(1, sqrt(1 - eta)) after a random CPTP map.
KrausChannel random_trace_decreasing(int rank, RngStream &rng) {
  const double eta = rng.uniform(0.1, 0.9);
  CMatrix f = CMatrix::Zero(2, 2);
  f(0, 0) = 1.0;
  f(1, 1) = std::sqrt(1.0 - eta);
  return compose(KrausChannel({f}), bruzda_channel(2, rank, rng));
}

Superoperator liouville(const KrausChannel &c) { return kraus_to_liouville(c); }

template <typename F>
CheckResult timed(int id, const std::string &name, F body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  r.id = id;
  r.name = name;
  try {
    body(r);
  } catch (const std::exception &e) {
    r.passed = false;
    r.detail += std::string(" exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<int> lengths_upto(int max_m) {
  std::vector<int> out(max_m);
  std::iota(out.begin(), out.end(), 1);
  return out;
}

// max |curve - best fit| over linear combinations of the given rate powers (plus optional constant).
double linear_model_residual(const std::vector<double> &curve, const std::vector<double> &rates, bool constant) {
  const Eigen::Index n = static_cast<Eigen::Index>(curve.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rates.size()) + (constant ? 1 : 0);
  RMatrix basis(n, c);
  RVector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index j = 0;
    if (constant) basis(i, j++) = 1.0;
    for (double r : rates) basis(i, j++) = std::pow(r, static_cast<double>(i));
    y(i) = curve[i];
  }
  const RVector coeffs = basis.colPivHouseholderQr().solve(y);
  return (basis * coeffs - y).lpNorm<Eigen::Infinity>();
}

double oracle_residual(const KrausChannel &noise, const GateSet &gates, const CMatrix &q, const CMatrix &rho,
                       int max_m) {
  const Superoperator s = liouville(noise);
  const auto lengths = lengths_upto(max_m);
  const auto full = theoretical_decay(noise, gates, q, rho, lengths);
  const auto reduced = theoretical_decay_reduced(s, gates, q, rho, lengths);
  double worst = 0.0;
  for (int m = 1; m <= max_m; ++m) {
    const double brute = brute_force_mean_squares(m, q, rho, noise, gates);
    worst = std::max({worst, std::abs(brute - full[m - 1]), std::abs(brute - reduced[m - 1])});
  }
  return worst;
}

}  // namespace

double spearman(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  auto ranks = [](const std::vector<double> &v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// 1
CheckResult check_oracle_equivalence(const VerifyOptions &o) {
  return timed(1, "oracle equivalence (brute force vs averaged operator, m <= 3)", [&](CheckResult &r) {
    const GateSet gates = clifford_1q();
    const double tol = 1e-10 * o.tolerance_scale;
    std::vector<double> residuals(20, 0.0);
    parallel_for(20, o.workers, [&](std::size_t i) {
      RngStream rng = verification_stream(o, 1).derive({i});
      const int rank = 1 + static_cast<int>(i % 4);
      const KrausChannel noise = i < 10 ? bruzda_channel(2, rank, rng) : random_trace_decreasing(rank, rng);
      const CMatrix rho = random_pure_state(2, rng);
      const CMatrix q = random_observable(2, rng);
      residuals[i] = oracle_residual(noise, gates, q, rho, 3);
    });
    const double worst = *std::max_element(residuals.begin(), residuals.end());
    r.values = {{"max_residual", worst}, {"tolerance", tol}};
    r.passed = worst <= tol;
    r.detail = "20 channels (10 TP, 10 trace-decreasing), max residual " + fmt(worst);
  });
}

// 2
CheckResult check_fit_functional_form(const VerifyOptions &o) {
  return timed(2, "fit-model functional form (m <= 100)", [&](CheckResult &r) {
    const GateSet gates = clifford_1q();
    RngStream rng = verification_stream(o, 2);
    const double tol = 1e-10 * o.tolerance_scale;
    std::vector<KrausChannel> tp{compose(reset_channel(0.003), unitary_channel(haar_unitary(2, rng))),
                                 depolarizing(2, 0.1), bruzda_channel(2, 2, rng), bruzda_channel(2, 3, rng)};
    std::vector<KrausChannel> td{random_trace_decreasing(2, rng), random_trace_decreasing(3, rng),
                                 bruzda_channel(2, 4, rng).scaled(0.95)};
    const std::vector<CMatrix> observables{pauli(3), ket0_projector(2), random_observable(2, rng)};
    const CMatrix rho = ket0_projector(2);
    const auto lengths = lengths_upto(100);
    double worst_tp = 0.0, worst_td = 0.0;
    for (const auto &c : tp) {
      const double u = unitarity(liouville(c));
      for (const auto &q : observables) {
        worst_tp = std::max(worst_tp, linear_model_residual(theoretical_decay(c, gates, q, rho, lengths), {u}, true));
      }
    }
    for (const auto &c : td) {
      const auto [lp, lm] = decay_eigenvalues(m_matrix(liouville(c)));
      for (const auto &q : observables) {
        worst_td = std::max(worst_td, linear_model_residual(theoretical_decay(c, gates, q, rho, lengths), {lp, lm}, false));
      }
    }
    r.values = {{"tp_max_residual", worst_tp}, {"td_max_residual", worst_td}, {"tolerance", tol}};
    r.passed = worst_tp <= tol && worst_td <= tol;
    r.detail = "A + B u^(m-1) residual " + fmt(worst_tp) + ", A l+^(m-1) + B l-^(m-1) residual " + fmt(worst_td);
  });
}

// 3
CheckResult check_nonunital_decay_fits(const VerifyOptions &o) {
  return timed(3, "nonunital decay fits (reset + Haar, reset + rotations)", [&](CheckResult &r) {
    RngStream rng = verification_stream(o, 3);
    const GateSet gates = clifford_1q();
    const CMatrix haar = haar_unitary(2, rng);
    RngStream rot = rng.derive({purpose(StreamPurpose::kPerturbation)});
    const GateDependentNoise rotations = eigenvalue_perturbed_gates(gates.unitaries(), 0.01, rot);

    struct Case {
      std::string label;
      NoiseModel noise;
    };
    const std::vector<Case> cases{
        {"reset 0.003 + Haar", compose(reset_channel(0.003), unitary_channel(haar))},
        {"reset 0.003 + rotations", rotations.after(reset_channel(0.003))},
        {"reset 0.01 + rotations", rotations.after(reset_channel(0.01))},
    };
    r.passed = true;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      ProtocolConfig config;
      config.noise = cases[i].noise;
      config.seed = o.seed + 300 + i;
      config.workers = o.workers;
      const DecayDataset data = run_purity_protocol(config);
      const FitResult fit = fit_tp_decay(data);
      const double theory = unitarity(average_noise(config.noise));
      const auto &u = fit.param("u");
      const double half = 0.5 * (u.ci_high - u.ci_low) * o.tolerance_scale;
      const double center = 0.5 * (u.ci_high + u.ci_low);
      const bool ok = fit.converged && std::abs(theory - center) <= half;
      // Exact gate-dependent curve for reference.
      const FitResult exact = fit_tp_decay(FitData{std::vector<double>(config.lengths.begin(), config.lengths.end()),
                                                   theoretical_purity_decay(config, config.lengths),
                                                   {}});
      r.values.push_back({cases[i].label + " fitted_u", u.value});
      r.values.push_back({cases[i].label + " ci_low", u.ci_low});
      r.values.push_back({cases[i].label + " ci_high", u.ci_high});
      r.values.push_back({cases[i].label + " theory_u", theory});
      r.values.push_back({cases[i].label + " exact_curve_u", exact.value("u")});
      r.detail += cases[i].label + ": u " + fmt(u.value) + " CI [" + fmt(u.ci_low) + ", " + fmt(u.ci_high) +
                  "] theory " + fmt(theory) + (ok ? " ok; " : " MISS; ");
      r.passed = r.passed && ok;
    }
  });
}

// 4
CheckResult check_unitary_noise_flat(const VerifyOptions &o) {
  return timed(4, "unitary noise gives flat purity curves", [&](CheckResult &r) {
    RngStream rng = verification_stream(o, 4);
    const std::vector<std::pair<std::string, KrausChannel>> cases{
        {"Haar unitary", unitary_channel(haar_unitary(2, rng))},
        {"X rotation 0.1", rotation_unitary({1.0, 0.0, 0.0}, 0.1)},
    };
    std::vector<int> lengths;
    for (int m = 10; m <= 100; m += 10) lengths.push_back(m);
    r.passed = true;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      ProtocolConfig config;
      config.noise = cases[i].second;
      config.lengths = lengths;
      config.seed = o.seed + 400 + i;
      config.workers = o.workers;
      const double u = unitarity(liouville(cases[i].second));
      const DecayDataset data = run_purity_protocol(config);
      const auto theory = theoretical_purity_decay(config, lengths);
      double worst_sigma = 0.0;
      for (std::size_t k = 0; k < data.rows.size(); ++k) {
        const double se = std::max(data.rows[k].std_error, 1e-300);
        worst_sigma = std::max(worst_sigma, std::abs(data.rows[k].mean - theory[k]) / se);
      }
      const auto [lo, hi] = std::minmax_element(theory.begin(), theory.end());
      const bool ok = worst_sigma <= 3.0 * o.tolerance_scale && std::abs(u - 1.0) <= 1e-12 * o.tolerance_scale;
      r.values.push_back({cases[i].first + " unitarity", u});
      r.values.push_back({cases[i].first + " max_sigma_deviation", worst_sigma});
      r.values.push_back({cases[i].first + " theory_spread", *hi - *lo});
      r.detail += cases[i].first + ": |u-1| " + fmt(std::abs(u - 1.0)) + ", worst deviation " + fmt(worst_sigma) +
                  " stderr" + (ok ? " ok; " : " MISS; ");
      r.passed = r.passed && ok;
    }
  });
}

// 5
CheckResult check_random_channel_properties(const VerifyOptions &o) {
  return timed(5, "random channel property suite (ranks 1-4, 1000 each)", [&](CheckResult &r) {
    constexpr std::size_t kPerRank = 1000;
    struct Worst {
      double jamiolkowski = 0, norm = 0, lambda_sum = 0, u_range = 0, probe_range = 0;
    };
    std::vector<Worst> per(4 * kPerRank);
    parallel_for(per.size(), o.workers, [&](std::size_t i) {
      RngStream rng = verification_stream(o, 5).derive({i});
      const int rank = 1 + static_cast<int>(i / kPerRank);
      const KrausChannel c = bruzda_channel(2, rank, rng);
      const Superoperator s = liouville(c);
      Worst &w = per[i];
      w.jamiolkowski = check_jamiolkowski_identity(c).residual;
      const NormBoundReport nb = check_norm_bounds(s);
      w.norm = std::max({0.0, -nb.nonunital_residual, -nb.sdl_residual, nb.tp ? -nb.tp_residual : 0.0});
      const MMatrix m = m_matrix(s);
      const auto [lp, lm] = decay_eigenvalues(m);
      const double u = unitarity(s);
      const double surv = survival_rate(s);
      w.lambda_sum = std::abs(lp + lm - (surv * surv + u));
      w.u_range = std::max({0.0, -u, u - 1.0});
      const auto [pas, psa] = probe_probabilities(s);
      w.probe_range = std::max({0.0, -pas, pas - 1.0, -psa, psa - 1.0});
    });
    Worst worst;
    for (const auto &w : per) {
      worst.jamiolkowski = std::max(worst.jamiolkowski, w.jamiolkowski);
      worst.norm = std::max(worst.norm, w.norm);
      worst.lambda_sum = std::max(worst.lambda_sum, w.lambda_sum);
      worst.u_range = std::max(worst.u_range, w.u_range);
      worst.probe_range = std::max(worst.probe_range, w.probe_range);
    }
    const double s = o.tolerance_scale;
    r.values = {{"jamiolkowski_residual", worst.jamiolkowski},
                {"norm_bound_violation", worst.norm},
                {"lambda_sum_residual", worst.lambda_sum},
                {"unitarity_range_violation", worst.u_range},
                {"probe_range_violation", worst.probe_range}};
    r.passed = worst.jamiolkowski < 1e-10 * s && worst.norm <= 1e-12 * s && worst.lambda_sum <= 1e-12 * s &&
               worst.u_range <= 1e-12 * s && worst.probe_range <= 1e-12 * s;
    r.detail = "jamiolkowski " + fmt(worst.jamiolkowski) + ", norm bounds " + fmt(worst.norm) + ", lambda sum " +
               fmt(worst.lambda_sum) + ", u range " + fmt(worst.u_range) + ", probes " + fmt(worst.probe_range);
  });
}

// 6
CheckResult check_infidelity_chain_suite(const VerifyOptions &o) {
  return timed(6, "infidelity chain u >= (1-2R)^2 >= (1-2r)^2", [&](CheckResult &r) {
    constexpr std::size_t kChannels = 500;
    std::vector<InfidelityChainReport> reports(kChannels);
    parallel_for(kChannels, o.workers, [&](std::size_t i) {
      RngStream rng = verification_stream(o, 6).derive({i});
      const KrausChannel c = bruzda_channel(2, 1 + static_cast<int>(i % 4), rng);
      reports[i] = check_infidelity_chain(liouville(c), 20, 0.0);
    });
    double worst_first = 0.0, worst_second = 0.0;
    int excluded = 0;
    for (const auto &rep : reports) {
      worst_first = std::max(worst_first, -rep.first_residual);
      if (rep.second_applicable) {
        worst_second = std::max(worst_second, -rep.second_residual);
      } else {
        ++excluded;
      }
    }
    double worst_saturation = 0.0;
    for (double p : {0.01, 0.1, 0.5}) {
      const auto rep = check_infidelity_chain(liouville(depolarizing(2, p)), 20, 0.0);
      worst_saturation = std::max({worst_saturation, std::abs(rep.first_residual), std::abs(rep.second_residual)});
    }
    const double tol = 1e-8 * o.tolerance_scale;
    r.values = {{"first_violation", worst_first},
                {"second_violation", worst_second},
                {"second_excluded", static_cast<double>(excluded)},
                {"depolarizing_saturation_residual", worst_saturation}};
    r.passed = worst_first <= tol && worst_second <= tol && worst_saturation < 1e-10 * o.tolerance_scale;
    r.detail = "violations " + fmt(worst_first) + " / " + fmt(worst_second) + " (" + std::to_string(excluded) +
               " channels with r > 1/2 excluded from the second), depolarizing saturation " + fmt(worst_saturation);
  });
}

// 7
CheckResult check_nonmonotonicity_witness(const VerifyOptions &o) {
  return timed(7, "non-monotonicity witness", [&](CheckResult &r) {
    const Superoperator e0 = liouville(state_prep_channel());
    const Superoperator half_adjoint = scale(adjoint_channel(e0), 0.5);
    const double u0 = unitarity(e0);
    const double u1 = unitarity(half_adjoint);
    const double composed = composition_unitarity(half_adjoint, e0);
    const double tol = 1e-12 * o.tolerance_scale;
    r.values = {{"u_E0", u0}, {"u_half_adjoint", u1}, {"u_composed", composed}};
    r.passed = std::abs(u0) <= tol && std::abs(u1) <= tol && std::abs(composed - 1.0 / 12.0) <= tol;
    r.detail = "u factors " + fmt(u0) + ", " + fmt(u1) + "; composed " + fmt(composed) + " (1/12 expected)";
  });
}

// 8
CheckResult check_clifford_2design(const VerifyOptions &o) {
  return timed(8, "Clifford 2-design certification", [&](CheckResult &r) {
    const GateSet g = clifford_1q();
    const double fp = frame_potential_2(g);
    const RMatrix t = twirl_projector_2copy(g);
    const RVector sv = Eigen::JacobiSVD<RMatrix>(t).singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-8 ? 1 : 0;
    const auto inv = invariant_basis(g.basis());
    const double fixes = std::max((t * inv.v1 - inv.v1).norm(), (t * inv.v2 - inv.v2).norm());
    const double proj = (t - inv.projector()).norm();
    const double tol = 1e-12 * o.tolerance_scale;
    r.values = {{"size", static_cast<double>(g.size())},
                {"frame_potential", fp},
                {"rank", static_cast<double>(rank)},
                {"fixes_B_residual", fixes},
                {"projector_residual", proj}};
    r.passed = g.size() == 24 && std::abs(fp - 2.0) <= tol && rank == 2 && fixes <= tol && proj <= tol;
    r.detail = std::to_string(g.size()) + " elements, frame potential " + fmt(fp) + ", twirl rank " +
               std::to_string(rank) + ", span{B1,B2} residual " + fmt(std::max(fixes, proj));
  });
}

// 9
CheckResult check_rank_ensembles(const VerifyOptions &o) {
  return timed(9, "unitarity vs Kraus rank and infidelity", [&](CheckResult &r) {
    constexpr std::size_t kPerRank = 1000;
    std::vector<double> u(4 * kPerRank), infid(4 * kPerRank);
    parallel_for(u.size(), o.workers, [&](std::size_t i) {
      RngStream rng = verification_stream(o, 9).derive({i});
      const Superoperator s = liouville(bruzda_channel(2, 1 + static_cast<int>(i / kPerRank), rng));
      u[i] = unitarity(s);
      infid[i] = average_infidelity(s);
    });
    std::vector<double> medians;
    for (std::size_t k = 0; k < 4; ++k) {
      medians.push_back(median(std::vector<double>(u.begin() + k * kPerRank, u.begin() + (k + 1) * kPerRank)));
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < medians.size(); ++k) decreasing = decreasing && medians[k] < medians[k - 1];

    const double rho = spearman(u, infid);
    // Spread of u around its least-squares line in the infidelity.
    const double n = static_cast<double>(u.size());
    const double mr = std::accumulate(infid.begin(), infid.end(), 0.0) / n;
    const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
    double srr = 0, sru = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      srr += (infid[i] - mr) * (infid[i] - mr);
      sru += (infid[i] - mr) * (u[i] - mu);
    }
    const double slope = sru / srr;
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) ss += std::pow(u[i] - mu - slope * (infid[i] - mr), 2);
    const double spread = std::sqrt(ss / (n - 2.0));

    r.values = {{"median_rank1", medians[0]}, {"median_rank2", medians[1]}, {"median_rank3", medians[2]},
                {"median_rank4", medians[3]}, {"spearman_u_infidelity", rho}, {"residual_spread", spread}};
    r.passed = decreasing && rho > 0.0 && spread > 0.01 / o.tolerance_scale;
    r.detail = "medians " + fmt(medians[0]) + " > " + fmt(medians[1]) + " > " + fmt(medians[2]) + " > " +
               fmt(medians[3]) + ", Spearman(u, infidelity) " + fmt(rho) + ", residual spread " + fmt(spread);
  });
}

// 10
CheckResult check_estimator_unbiasedness(const VerifyOptions &o) {
  return timed(10, "unbiased squared-expectation estimator", [&](CheckResult &r) {
    constexpr int kReps = 100000;
    constexpr int kShots = 150;
    r.passed = true;
    for (double mu : {0.0, 0.3, 0.9}) {
      RngStream rng = verification_stream(o, 10).derive({static_cast<std::uint64_t>(std::llround(mu * 10))});
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < kReps; ++i) {
        const double v = unbiased_square(simulate_shots(mu, kShots, rng), kShots);
        sum += v;
        sq += v * v;
      }
      const double mean = sum / kReps;
      const double sd = std::sqrt((sq - kReps * mean * mean) / (kReps - 1.0));
      const double z = std::abs(mean - mu * mu) / (sd / std::sqrt(static_cast<double>(kReps)));
      const bool ok = z <= 3.0 * o.tolerance_scale;
      r.values.push_back({"mu=" + fmt(mu) + " mean", mean});
      r.values.push_back({"mu=" + fmt(mu) + " z", z});
      r.detail += "mu " + fmt(mu) + ": mean " + fmt(mean) + " (" + fmt(z) + " SE)" + (ok ? "; " : " MISS; ");
      r.passed = r.passed && ok;
    }
  });
}

// 11
CheckResult check_loss_and_variance(const VerifyOptions &o) {
  return timed(11, "loss protocol and variance identity", [&](CheckResult &r) {
    const KrausChannel noise = depolarizing(2, 0.1).scaled(0.98);
    ProtocolConfig loss;
    loss.noise = noise;
    loss.seed = o.seed + 1100;
    loss.workers = o.workers;
    const FitResult fit = loss_fit(run_loss_protocol(loss));
    const double s_fit = fit.value("S");
    const bool loss_ok = fit.converged && std::abs(s_fit - 0.98) <= 0.005 * o.tolerance_scale;
    r.values = {{"fitted_S", s_fit}, {"S_ci_low", fit.param("S").ci_low}, {"S_ci_high", fit.param("S").ci_high}};
    r.detail = "fitted S " + fmt(s_fit) + (loss_ok ? " ok; " : " MISS; ");

    // Variance of Q_j over sequences: direct sample variance vs E[Q^2] - E[Q]^2 from the two protocols.
    const CMatrix q = ket0_projector(2);
    ProtocolConfig base;
    base.noise = noise;
    base.lengths = {1, 5, 20, 50};
    base.sequences = 1000;
    base.spam.enabled = false;
    base.observables = {q};
    base.loss_observable = q;
    base.workers = o.workers;
    const GateSet &gates = base.gates;
    const auto second = theoretical_decay(noise, gates, q, ket0_projector(2), base.lengths);
    const auto first = theoretical_first_moment(noise, gates, q, ket0_projector(2), base.lengths);

    ProtocolConfig exact = base;
    exact.exact_expectations = true;
    exact.seed = o.seed + 1101;
    const DecayDataset direct = run_loss_protocol(exact);
    ProtocolConfig purity = base;
    purity.seed = o.seed + 1102;
    const DecayDataset squares = run_purity_protocol(purity);
    ProtocolConfig means = base;
    means.seed = o.seed + 1103;
    const DecayDataset firsts = run_loss_protocol(means);

    bool var_ok = true;
    double worst_direct = 0.0, worst_protocol = 0.0;
    for (std::size_t i = 0; i < base.lengths.size(); ++i) {
      const int m = base.lengths[i];
      std::vector<double> values;
      for (const auto &rec : direct.raw) {
        if (rec.m == m) values.push_back(rec.value);
      }
      const double k = static_cast<double>(values.size());
      const double mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
      double m2 = 0.0, m4 = 0.0;
      for (double v : values) {
        m2 += std::pow(v - mean, 2);
        m4 += std::pow(v - mean, 4);
      }
      const double var = m2 / (k - 1.0);
      const double se_var = std::sqrt(std::max(m4 / k - std::pow(m2 / k, 2), 0.0) / k);
      const double theory = second[i] - first[i] * first[i];
      const double protocol = squares.rows[i].mean - std::pow(firsts.rows[i].mean, 2);
      const double se_protocol = std::sqrt(std::pow(squares.rows[i].std_error, 2) +
                                           std::pow(2.0 * firsts.rows[i].mean * firsts.rows[i].std_error, 2));
      const double z_direct = std::abs(var - theory) / std::max(se_var, 1e-300);
      const double z_protocol = std::abs(protocol - var) / std::max(std::hypot(se_protocol, se_var), 1e-300);
      worst_direct = std::max(worst_direct, z_direct);
      worst_protocol = std::max(worst_protocol, z_protocol);
      r.values.push_back({"m=" + std::to_string(m) + " direct_variance", var});
      r.values.push_back({"m=" + std::to_string(m) + " protocol_variance", protocol});
      r.values.push_back({"m=" + std::to_string(m) + " theory_variance", theory});
      var_ok = var_ok && z_direct <= 3.0 * o.tolerance_scale && z_protocol <= 3.0 * o.tolerance_scale;
    }
    r.detail += "variance: direct vs theory " + fmt(worst_direct) + " SE, protocols vs direct " +
                fmt(worst_protocol) + " SE" + (var_ok ? "" : " MISS");
    r.passed = loss_ok && var_ok;
  });
}

const std::vector<std::pair<int, CheckFn>> &acceptance_checks() {
  static const std::vector<std::pair<int, CheckFn>> checks{
      {1, check_oracle_equivalence},        {2, check_fit_functional_form},
      {3, check_nonunital_decay_fits},      {4, check_unitary_noise_flat},
      {5, check_random_channel_properties}, {6, check_infidelity_chain_suite},
      {7, check_nonmonotonicity_witness},   {8, check_clifford_2design},
      {9, check_rank_ensembles},            {10, check_estimator_unbiasedness},
      {11, check_loss_and_variance},
  };
  return checks;
}

std::vector<CheckResult> run_acceptance(const VerifyOptions &options) {
  std::vector<CheckResult> out;
  for (const auto &[id, fn] : acceptance_checks()) out.push_back(fn(options));
  return out;
}

std::vector<CheckResult> run_quick_checks(const VerifyOptions &o) {
  std::vector<CheckResult> out;
  out.push_back(check_clifford_2design(o));
  out.push_back(timed(101, "Jamiolkowski identity on 100 random channels", [&](CheckResult &r) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      RngStream rng = verification_stream(o, 101).derive({i});
      const int rank = 1 + static_cast<int>(i % 4);
      const KrausChannel c = i % 2 ? bruzda_channel(2, rank, rng) : random_trace_decreasing(rank, rng);
      worst = std::max(worst, check_jamiolkowski_identity(c).residual);
    }
    r.values = {{"max_residual", worst}};
    r.passed = worst < 1e-10 * o.tolerance_scale;
    r.detail = "max residual " + fmt(worst);
  }));
  out.push_back(timed(102, "oracle equivalence for m <= 2", [&](CheckResult &r) {
    const GateSet gates = clifford_1q();
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 4; ++i) {
      RngStream rng = verification_stream(o, 102).derive({i});
      const KrausChannel noise = i < 2 ? bruzda_channel(2, 2, rng) : random_trace_decreasing(2, rng);
      worst = std::max(worst, oracle_residual(noise, gates, random_observable(2, rng), random_pure_state(2, rng), 2));
    }
    r.values = {{"max_residual", worst}};
    r.passed = worst <= 1e-10 * o.tolerance_scale;
    r.detail = "max residual " + fmt(worst);
  }));
  return out;
}

}  // namespace unitarity
