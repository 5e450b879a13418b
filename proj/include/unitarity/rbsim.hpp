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

#ifndef UNITARITY_RBSIM_HPP
#define UNITARITY_RBSIM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "unitarity/design.hpp"
#include "unitarity/ensembles.hpp"

namespace unitarity {

using Sequence = std::vector<std::size_t>;

/*
 * Gate-independent noise E acts between consecutive gates (the residual
 * copy before the first gate is absorbed into state preparation). With
 * gate-dependent noise every implemented gate is U_g o E_g.
 */
using NoiseModel = std::variant<KrausChannel, GateDependentNoise>;

struct SpamModel {
  bool enabled = true;
  double prep_angle = 0.05;  // near-identity preparation unitary exp(-i t H), t ~ U[0, prep_angle]
  double meas_angle = 0.05;  // random orthogonal rotation of measured unital components
  double scale_min = 0.95;
  double scale_max = 1.0;
};

/// Concrete state and measured observables drawn from a SpamModel.
struct SpamRealization {
  CMatrix rho;
  std::vector<CMatrix> observables;
};

SpamRealization realize_spam(const SpamModel &model, const CMatrix &ideal_rho,
                             const std::vector<CMatrix> &ideal_observables, RngStream rng);

/// Non-identity n-qubit Paulis (unnormalized, eigenvalues +-1).
std::vector<CMatrix> default_observables(int d);

struct ProtocolConfig {
  GateSet gates = clifford_1q();
  NoiseModel noise = identity_channel(2);
  std::vector<int> lengths = default_lengths();
  int sequences = 30;
  int shots = 150;
  bool exact_expectations = false;  // N -> infinity limit
  SpamModel spam;
  std::uint64_t seed = 1;
  std::vector<CMatrix> observables;       // empty: default_observables(d)
  std::optional<CMatrix> loss_observable;  // empty: identity (survival)
  int workers = 0;                         // 0: UNITARITY_WORKERS or hardware threads

  /// {2, 4, ..., 100}
  static std::vector<int> default_lengths();
  /// Throws std::invalid_argument listing every invalid field.
  void validate() const;
};

struct DecayRow {
  int m = 0;
  double mean = 0.0;
  double std_error = 0.0;
  int sequences = 0;
  int shots = 0;
};

struct RawRecord {
  int m = 0;
  int seq_index = 0;
  double value = 0.0;
};

/// Per-length aggregates; `kind` is "purity" (squared) or "loss" (first moment).
struct DecayDataset {
  std::string kind = "purity";
  std::vector<DecayRow> rows;
  std::vector<RawRecord> raw;  // never clipped
};

// ---------------------------------------------------------------------------
// Primitive operations

/// m iid uniform gate indices in [0, gateset_size).
Sequence sample_sequence(int m, std::size_t gateset_size, RngStream &rng);

/// (Q | U_jm E ... U_j2 E U_j1 | rho), or with U_g o E_g per gate for gate-dependent noise.
double exact_expectation(const CMatrix &q, const Sequence &sequence, const CMatrix &rho,
                         const NoiseModel &noise, const GateSet &gates);

/// Mean of n iid +-1 outcomes with P(+1) = (1 + mu)/2. Throws if |mu| > 1 + 1e-12.
double simulate_shots(double mu, int n, RngStream &rng);

struct ShotSample {
  double mean = 0.0;               // (#(+1) - #(-1)) / n
  double detected_fraction = 1.0;  // fraction of non-lost shots
};

/*
 * Two-outcome measurement of Q on a possibly sub-normalized state: +1 with
 * probability (trace + expectation)/2, -1 with (trace - expectation)/2, and a
 * lost shot (outcome 0) otherwise.
 */
ShotSample simulate_shots_lossy(double expectation, double trace, int n, RngStream &rng);

/*
 * (n xbar^2 - f) / (n - 1), unbiased for mu^2 when outcomes are +-1 (f = 1)
 * or +-1/0 with f the detected fraction. Throws for n < 2.
 */
double unbiased_square(double sample_mean, int n, double detected_fraction = 1.0);

/// Precomputed Liouville propagation for one protocol configuration.
class ProtocolSimulator {
 public:
  explicit ProtocolSimulator(const ProtocolConfig &config);

  const ProtocolConfig &config() const { return config_; }
  const SpamRealization &spam() const { return spam_; }
  const CMatrix &loss_observable() const { return loss_observable_; }
  /// 1/(d-1) for the default Pauli set, 1 for user observables.
  double square_weight() const { return square_weight_; }

  /// |rho_j) in the Pauli basis after the whole sequence.
  RVector final_state(const Sequence &sequence) const;

  /*
   * Sum over observables of weight * unbiased_square(shots), or of the exact
   * squared expectation when exact_expectations is set. Shot streams are
   * rng.derive({observable_index}).
   */
  double purity_estimate(const Sequence &sequence, const RngStream &rng) const;
  /// Estimate of (Q | rho_j) for the loss observable.
  double loss_estimate(const Sequence &sequence, const RngStream &rng) const;

  /// Propagators for gate g: `first` applies before the first gate, `step` afterwards.
  const std::vector<RMatrix> &first_steps() const { return first_; }
  const std::vector<RMatrix> &steps() const { return step_; }

 private:
  ProtocolConfig config_;
  SpamRealization spam_;
  CMatrix loss_observable_;
  RVector rho_vec_;
  std::vector<RVector> observable_vecs_;
  RVector loss_vec_;
  double square_weight_ = 1.0;
  std::vector<RMatrix> first_;
  std::vector<RMatrix> step_;
};

/// Single-sequence purity estimate for `config` (builds a simulator).
double purity_estimate(const Sequence &sequence, const ProtocolConfig &config, const RngStream &rng);

DecayDataset run_purity_protocol(const ProtocolConfig &config);
DecayDataset run_loss_protocol(const ProtocolConfig &config);

// ---------------------------------------------------------------------------
// Exact predictions and oracles

/// |G|^-m sum over all sequences of Q_j^2; throws when |G|^m > 2e4.
double brute_force_mean_squares(int m, const CMatrix &q, const CMatrix &rho,
                                const NoiseModel &noise, const GateSet &gates);
/// |G|^-m sum over all sequences of Q_j.
double brute_force_mean(int m, const CMatrix &q, const CMatrix &rho, const NoiseModel &noise,
                        const GateSet &gates);

/*
 * Exact E_j[Q_j^2] per length from the two-copy transfer operator
 * T = |G|^-1 sum_g phi(g) (x) phi(g): (Q(x)Q| T (E(x)E T)^{m-1} |rho(x)rho),
 * or (Q(x)Q| T_gd^m |rho(x)rho) with T_gd built from U_g o E_g.
 */
std::vector<double> theoretical_decay(const NoiseModel &noise, const GateSet &gates,
                                      const CMatrix &q, const CMatrix &rho,
                                      const std::vector<int> &lengths);

/*
 * Same quantity through the 2x2 restriction M for a 2-design: endpoints
 * projected onto span{B1, B2}, then q^T M^{m-1} r. Gate-independent noise only.
 */
std::vector<double> theoretical_decay_reduced(const Superoperator &noise, const GateSet &gates,
                                              const CMatrix &q, const CMatrix &rho,
                                              const std::vector<int> &lengths);

/// Exact E_j[Q_j] per length.
std::vector<double> theoretical_first_moment(const NoiseModel &noise, const GateSet &gates,
                                             const CMatrix &q, const CMatrix &rho,
                                             const std::vector<int> &lengths);

/// Expected purity estimate per length for the SPAM realization of `config`.
std::vector<double> theoretical_purity_decay(const ProtocolConfig &config,
                                             const std::vector<int> &lengths);

/// Effective gate-averaged channel: the noise itself, or |G|^-1 sum_g E_g.
Superoperator average_noise(const NoiseModel &noise);

// ---------------------------------------------------------------------------
// Parallel helpers

/// Worker count from UNITARITY_WORKERS, else hardware concurrency (at least 1).
int default_workers();

/// Calls fn(i) for i in [0, n) on up to `workers` threads; results must be written by index.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)> &fn);

}  // namespace unitarity

#endif  // UNITARITY_RBSIM_HPP
