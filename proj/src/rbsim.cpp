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

#include "unitarity/rbsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace unitarity {

namespace {

constexpr double kBruteForceLimit = 2e4;

double operator_norm(const CMatrix &h) {
  const RVector values = hermitian_eigensystem(h).values;
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

Superoperator to_superoperator(const KrausChannel &c) {
  return kraus_to_liouville(c, pauli_basis_for_dim(c.dim()));
}

int noise_dim(const NoiseModel &noise) {
  if (const auto *k = std::get_if<KrausChannel>(&noise)) return k->dim();
  const auto &gd = std::get<GateDependentNoise>(noise);
  if (gd.errors.empty()) throw std::invalid_argument("gate-dependent noise has no error channels");
  return gd.errors.front().dim();
}

struct Propagators {
  std::vector<RMatrix> first;
  std::vector<RMatrix> step;
};

// first[g] acts at the first position, step[g] at every later position.
Propagators build_propagators(const NoiseModel &noise, const GateSet &gates) {
  if (noise_dim(noise) != gates.dim()) {
    throw std::invalid_argument("noise and gate set dimensions differ");
  }
  Propagators p;
  const auto &liou = gates.liouville();
  if (const auto *k = std::get_if<KrausChannel>(&noise)) {
    const RMatrix e = to_superoperator(*k).matrix();
    p.first = liou;
    for (const auto &l : liou) p.step.push_back(l * e);
  } else {
    const auto &gd = std::get<GateDependentNoise>(noise);
    if (gd.errors.size() != gates.size()) {
      throw std::invalid_argument("gate-dependent noise has " + std::to_string(gd.errors.size()) +
                                  " channels for " + std::to_string(gates.size()) + " gates");
    }
    for (std::size_t g = 0; g < liou.size(); ++g) {
      p.step.push_back(liou[g] * to_superoperator(gd.errors[g]).matrix());
    }
    p.first = p.step;
  }
  return p;
}

RVector propagate(const Propagators &p, const Sequence &sequence, RVector state) {
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const auto &table = i == 0 ? p.first : p.step;
    if (sequence[i] >= table.size()) {
      throw std::out_of_range("sequence index " + std::to_string(sequence[i]) +
                              " outside gate set of size " + std::to_string(table.size()));
    }
    state = table[sequence[i]] * state;
  }
  return state;
}

void check_lengths(const std::vector<int> &lengths) {
  for (int m : lengths) {
    if (m < 1) throw std::invalid_argument("sequence length must be >= 1, got " + std::to_string(m));
  }
}

// Evaluates f(state after m applications) for each requested m, with one pass up to max m.
template <typename Step, typename Read>
std::vector<double> sweep(const std::vector<int> &lengths, RVector state, Step step, Read read) {
  check_lengths(lengths);
  std::vector<double> out(lengths.size(), 0.0);
  if (lengths.empty()) return out;
  std::map<int, std::vector<std::size_t>> wanted;
  for (std::size_t i = 0; i < lengths.size(); ++i) wanted[lengths[i]].push_back(i);
  const int max_m = wanted.rbegin()->first;
  for (int m = 1; m <= max_m; ++m) {
    state = step(m, state);
    const auto it = wanted.find(m);
    if (it != wanted.end()) {
      const double value = read(state);
      for (std::size_t i : it->second) out[i] = value;
    }
  }
  return out;
}

std::size_t checked_enumeration_size(int m, std::size_t gateset_size) {
  if (m < 1) throw std::invalid_argument("sequence length must be >= 1");
  const double count = std::pow(static_cast<double>(gateset_size), m);
  if (count > kBruteForceLimit) {
    std::ostringstream msg;
    msg << "brute force enumeration of " << count << " sequences exceeds the limit of "
        << kBruteForceLimit;
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(std::llround(count));
}

template <typename F>
double enumerate_mean(int m, const NoiseModel &noise, const GateSet &gates, const CMatrix &q,
                      const CMatrix &rho, F f) {
  const std::size_t total = checked_enumeration_size(m, gates.size());
  const Propagators p = build_propagators(noise, gates);
  const RVector r = vectorize(*gates.basis(), rho);
  const RVector qv = vectorize(*gates.basis(), q);
  Sequence seq(m, 0);
  double sum = 0.0;
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rest = n;
    for (int i = 0; i < m; ++i) {
      seq[i] = rest % gates.size();
      rest /= gates.size();
    }
    sum += f(qv.dot(propagate(p, seq, r)));
  }
  return sum / static_cast<double>(total);
}

// Fixed-order aggregation of per-sequence values into rows.
DecayDataset aggregate(const ProtocolConfig &config, const std::string &kind,
                       const std::vector<double> &values) {
  DecayDataset out;
  out.kind = kind;
  const std::size_t k = config.sequences;
  for (std::size_t li = 0; li < config.lengths.size(); ++li) {
    DecayRow row;
    row.m = config.lengths[li];
    row.sequences = config.sequences;
    row.shots = config.exact_expectations ? 0 : config.shots;
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = values[li * k + j];
      sum += v;
      out.raw.push_back({row.m, static_cast<int>(j), v});
    }
    row.mean = sum / static_cast<double>(k);
    if (k > 1) {
      double ss = 0.0;
      for (std::size_t j = 0; j < k; ++j) ss += std::pow(values[li * k + j] - row.mean, 2);
      row.std_error = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
    }
    out.rows.push_back(row);
  }
  return out;
}

template <typename F>
DecayDataset run_protocol(const ProtocolConfig &config, const std::string &kind, F estimate) {
  config.validate();
  const ProtocolSimulator sim(config);
  const std::size_t k = config.sequences;
  std::vector<double> values(config.lengths.size() * k, 0.0);
  const RngStream root(config.seed);
  parallel_for(values.size(), config.workers, [&](std::size_t item) {
    const std::size_t li = item / k;
    const std::uint64_t m = config.lengths[li];
    const std::uint64_t j = item % k;
    RngStream seq_rng = root.derive({purpose(StreamPurpose::kSequence), m, j});
    const Sequence seq = sample_sequence(config.lengths[li], config.gates.size(), seq_rng);
    values[item] = estimate(sim, seq, root.derive({purpose(StreamPurpose::kShots), m, j}));
  });
  return aggregate(config, kind, values);
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<CMatrix> default_observables(int d) {
  const auto basis = pauli_basis_for_dim(d);
  const double scale = std::sqrt(static_cast<double>(d));
  std::vector<CMatrix> out;
  for (int k = 1; k < basis->size(); ++k) out.push_back(basis->elements[k] * scale);
  return out;
}

SpamRealization realize_spam(const SpamModel &model, const CMatrix &ideal_rho,
                             const std::vector<CMatrix> &ideal_observables, RngStream rng) {
  SpamRealization out{ideal_rho, ideal_observables};
  if (!model.enabled) return out;
  const int d = static_cast<int>(ideal_rho.rows());
  const auto basis = pauli_basis_for_dim(d);

  RngStream prep = rng.derive({0});
  CMatrix h = random_hermitian(d, prep);
  h /= operator_norm(h);
  const CMatrix v = unitary_exp(h, prep.uniform(0.0, model.prep_angle));
  out.rho = v * ideal_rho * v.adjoint();

  const int n = d * d - 1;
  for (std::size_t k = 0; k < ideal_observables.size(); ++k) {
    RngStream meas = rng.derive({1, static_cast<std::uint64_t>(k)});
    RMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
      a(i, i) = 0.0;
      for (int j = i + 1; j < n; ++j) {
        a(i, j) = meas.normal();
        a(j, i) = -a(i, j);
      }
    }
    // exp(t A) = exp(-i t H) with H = iA Hermitian.
    const CMatrix ha = Complex(0.0, 1.0) * a.cast<Complex>();
    const double norm = operator_norm(ha);
    RMatrix rotation = RMatrix::Identity(n, n);
    if (norm > 0.0) {
      rotation = unitary_exp(ha / norm, meas.uniform(0.0, model.meas_angle)).real();
    }
    const double s = meas.uniform(model.scale_min, model.scale_max);
    RVector c = vectorize(*basis, ideal_observables[k]);
    c.tail(n) = s * rotation * c.tail(n);
    CMatrix q = CMatrix::Zero(d, d);
    for (int i = 0; i < basis->size(); ++i) q += c(i) * basis->elements[i];
    const double qn = operator_norm(q);
    if (qn > 1.0) q /= qn;
    out.observables[k] = q;
  }
  return out;
}

std::vector<int> ProtocolConfig::default_lengths() {
  std::vector<int> out;
  for (int m = 2; m <= 100; m += 2) out.push_back(m);
  return out;
}

void ProtocolConfig::validate() const {
  std::vector<std::string> problems;
  if (lengths.empty()) problems.push_back("lengths is empty");
  for (int m : lengths) {
    if (m < 1) problems.push_back("length " + std::to_string(m) + " < 1");
  }
  if (sequences < 1) problems.push_back("sequences must be >= 1");
  if (!exact_expectations && shots < 2) problems.push_back("shots must be >= 2");
  int nd = 0;
  try {
    nd = noise_dim(noise);
  } catch (const std::exception &e) {
    problems.push_back(e.what());
  }
  if (nd != 0 && nd != gates.dim()) problems.push_back("noise and gate set dimensions differ");
  if (const auto *gd = std::get_if<GateDependentNoise>(&noise)) {
    if (gd->errors.size() != gates.size()) {
      problems.push_back("gate-dependent noise needs one channel per gate");
    }
  }
  auto check_observable = [&](const CMatrix &q, const std::string &name) {
    if (q.rows() != gates.dim() || q.cols() != gates.dim()) {
      problems.push_back(name + " has wrong dimension");
    } else if (!is_hermitian(q)) {
      problems.push_back(name + " is not Hermitian");
    } else if (operator_norm(q) > 1.0 + tol::kStructural) {
      problems.push_back(name + " has operator norm > 1");
    }
  };
  for (std::size_t k = 0; k < observables.size(); ++k) {
    check_observable(observables[k], "observable " + std::to_string(k));
  }
  if (loss_observable) check_observable(*loss_observable, "loss observable");
  if (spam.scale_min > spam.scale_max || spam.scale_min < 0.0 || spam.scale_max > 1.0) {
    problems.push_back("spam scale range must satisfy 0 <= min <= max <= 1");
  }
  if (spam.prep_angle < 0.0 || spam.meas_angle < 0.0) problems.push_back("spam angles must be >= 0");
  if (!problems.empty()) {
    std::string msg = "invalid protocol config:";
    for (const auto &p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
}

Sequence sample_sequence(int m, std::size_t gateset_size, RngStream &rng) {
  if (m < 1) throw std::invalid_argument("sequence length must be >= 1");
  if (gateset_size == 0) throw std::invalid_argument("empty gate set");
  Sequence out(m);
  for (auto &s : out) s = rng.index(gateset_size);
  return out;
}

double exact_expectation(const CMatrix &q, const Sequence &sequence, const CMatrix &rho,
                         const NoiseModel &noise, const GateSet &gates) {
  if (sequence.empty()) throw std::invalid_argument("empty sequence");
  const Propagators p = build_propagators(noise, gates);
  const RVector r = vectorize(*gates.basis(), rho);
  return vectorize(*gates.basis(), q).dot(propagate(p, sequence, r));
}

double simulate_shots(double mu, int n, RngStream &rng) {
  if (n < 1) throw std::invalid_argument("shot count must be >= 1");
  if (!std::isfinite(mu) || std::abs(mu) > 1.0 + 1e-12) {
    throw std::domain_error("expectation " + std::to_string(mu) + " outside [-1, 1]");
  }
  const double p = std::clamp((1.0 + mu) / 2.0, 0.0, 1.0);
  const auto plus = static_cast<double>(rng.binomial(n, p));
  return (2.0 * plus - n) / n;
}

ShotSample simulate_shots_lossy(double expectation, double trace, int n, RngStream &rng) {
  if (n < 1) throw std::invalid_argument("shot count must be >= 1");
  const double t = std::clamp(trace, 0.0, 1.0);
  const double p_plus = std::clamp((t + expectation) / 2.0, 0.0, t);
  const auto detected = rng.binomial(n, t);
  const double p_cond = t > 0.0 ? std::clamp(p_plus / t, 0.0, 1.0) : 0.0;
  const auto plus = detected > 0 ? rng.binomial(detected, p_cond) : 0;
  const double minus = static_cast<double>(detected - plus);
  return {(static_cast<double>(plus) - minus) / n, static_cast<double>(detected) / n};
}

double unbiased_square(double sample_mean, int n, double detected_fraction) {
  if (n < 2) throw std::invalid_argument("unbiased_square needs at least 2 shots");
  return (n * sample_mean * sample_mean - detected_fraction) / (n - 1.0);
}

// ---------------------------------------------------------------------------

ProtocolSimulator::ProtocolSimulator(const ProtocolConfig &config) : config_(config) {
  const int d = config_.gates.dim();
  const auto &basis = *config_.gates.basis();
  CMatrix ideal_rho = CMatrix::Zero(d, d);
  ideal_rho(0, 0) = 1.0;
  std::vector<CMatrix> ideal = config_.observables;
  square_weight_ = 1.0;
  if (ideal.empty()) {
    ideal = default_observables(d);
    square_weight_ = 1.0 / (d - 1.0);
  }
  ideal.push_back(config_.loss_observable.value_or(CMatrix::Identity(d, d)));
  spam_ = realize_spam(config_.spam, ideal_rho, ideal,
                       RngStream(config_.seed, {purpose(StreamPurpose::kSpam)}));
  loss_observable_ = spam_.observables.back();
  spam_.observables.pop_back();

  rho_vec_ = vectorize(basis, spam_.rho);
  for (const auto &q : spam_.observables) observable_vecs_.push_back(vectorize(basis, q));
  loss_vec_ = vectorize(basis, loss_observable_);
  Propagators p = build_propagators(config_.noise, config_.gates);
  first_ = std::move(p.first);
  step_ = std::move(p.step);
}

RVector ProtocolSimulator::final_state(const Sequence &sequence) const {
  return propagate(Propagators{first_, step_}, sequence, rho_vec_);
}

double ProtocolSimulator::purity_estimate(const Sequence &sequence, const RngStream &rng) const {
  const RVector state = final_state(sequence);
  const double trace = state(0) * std::sqrt(static_cast<double>(config_.gates.dim()));
  double total = 0.0;
  for (std::size_t k = 0; k < observable_vecs_.size(); ++k) {
    const double mu = observable_vecs_[k].dot(state);
    if (config_.exact_expectations) {
      total += mu * mu;
    } else {
      RngStream shots = rng.derive({static_cast<std::uint64_t>(k)});
      const ShotSample s = simulate_shots_lossy(mu, trace, config_.shots, shots);
      total += unbiased_square(s.mean, config_.shots, s.detected_fraction);
    }
  }
  return square_weight_ * total;
}

double ProtocolSimulator::loss_estimate(const Sequence &sequence, const RngStream &rng) const {
  const RVector state = final_state(sequence);
  const double mu = loss_vec_.dot(state);
  if (config_.exact_expectations) return mu;
  const double trace = state(0) * std::sqrt(static_cast<double>(config_.gates.dim()));
  RngStream shots = rng.derive({0});
  return simulate_shots_lossy(mu, trace, config_.shots, shots).mean;
}

double purity_estimate(const Sequence &sequence, const ProtocolConfig &config, const RngStream &rng) {
  config.validate();
  return ProtocolSimulator(config).purity_estimate(sequence, rng);
}

DecayDataset run_purity_protocol(const ProtocolConfig &config) {
  return run_protocol(config, "purity",
                      [](const ProtocolSimulator &sim, const Sequence &seq, const RngStream &rng) {
                        return sim.purity_estimate(seq, rng);
                      });
}

DecayDataset run_loss_protocol(const ProtocolConfig &config) {
  return run_protocol(config, "loss",
                      [](const ProtocolSimulator &sim, const Sequence &seq, const RngStream &rng) {
                        return sim.loss_estimate(seq, rng);
                      });
}

// ---------------------------------------------------------------------------

double brute_force_mean_squares(int m, const CMatrix &q, const CMatrix &rho,
                                const NoiseModel &noise, const GateSet &gates) {
  return enumerate_mean(m, noise, gates, q, rho, [](double x) { return x * x; });
}

double brute_force_mean(int m, const CMatrix &q, const CMatrix &rho, const NoiseModel &noise,
                        const GateSet &gates) {
  return enumerate_mean(m, noise, gates, q, rho, [](double x) { return x; });
}

std::vector<double> theoretical_decay(const NoiseModel &noise, const GateSet &gates,
                                      const CMatrix &q, const CMatrix &rho,
                                      const std::vector<int> &lengths) {
  const Propagators p = build_propagators(noise, gates);
  const Eigen::Index n = p.step.front().rows();
  RMatrix t_first = RMatrix::Zero(n * n, n * n);
  RMatrix t_step = RMatrix::Zero(n * n, n * n);
  for (std::size_t g = 0; g < p.step.size(); ++g) {
    t_first += kron(p.first[g], p.first[g]);
    t_step += kron(p.step[g], p.step[g]);
  }
  t_first /= static_cast<double>(gates.size());
  t_step /= static_cast<double>(gates.size());
  const RVector r = vectorize(*gates.basis(), rho);
  const RVector qv = vectorize(*gates.basis(), q);
  const RVector q2 = kron(qv, qv);
  return sweep(
      lengths, kron(r, r),
      [&](int m, const RVector &v) -> RVector { return m == 1 ? t_first * v : t_step * v; },
      [&](const RVector &v) { return q2.dot(v); });
}

std::vector<double> theoretical_decay_reduced(const Superoperator &noise, const GateSet &gates,
                                              const CMatrix &q, const CMatrix &rho,
                                              const std::vector<int> &lengths) {
  if (noise.dim() != gates.dim()) throw std::invalid_argument("noise and gate set dimensions differ");
  const auto inv = invariant_basis(gates.basis());
  const Eigen::Matrix2d mm = m_matrix(noise).matrix();
  const RVector r = vectorize(*gates.basis(), rho);
  const RVector qv = vectorize(*gates.basis(), q);
  const RVector r2 = kron(r, r);
  const RVector q2 = kron(qv, qv);
  Eigen::Vector2d start(inv.v1.dot(r2), inv.v2.dot(r2));
  const Eigen::Vector2d end(inv.v1.dot(q2), inv.v2.dot(q2));
  RVector state = start;
  return sweep(
      lengths, state,
      [&](int m, const RVector &v) -> RVector {
        if (m == 1) return v;
        return mm * v;
      },
      [&](const RVector &v) { return end.dot(v); });
}

std::vector<double> theoretical_first_moment(const NoiseModel &noise, const GateSet &gates,
                                             const CMatrix &q, const CMatrix &rho,
                                             const std::vector<int> &lengths) {
  const Propagators p = build_propagators(noise, gates);
  const Eigen::Index n = p.step.front().rows();
  RMatrix t_first = RMatrix::Zero(n, n);
  RMatrix t_step = RMatrix::Zero(n, n);
  for (std::size_t g = 0; g < p.step.size(); ++g) {
    t_first += p.first[g];
    t_step += p.step[g];
  }
  t_first /= static_cast<double>(gates.size());
  t_step /= static_cast<double>(gates.size());
  const RVector qv = vectorize(*gates.basis(), q);
  return sweep(
      lengths, vectorize(*gates.basis(), rho),
      [&](int m, const RVector &v) -> RVector { return m == 1 ? t_first * v : t_step * v; },
      [&](const RVector &v) { return qv.dot(v); });
}

std::vector<double> theoretical_purity_decay(const ProtocolConfig &config,
                                             const std::vector<int> &lengths) {
  config.validate();
  const ProtocolSimulator sim(config);
  std::vector<double> out(lengths.size(), 0.0);
  for (const auto &q : sim.spam().observables) {
    const auto part = theoretical_decay(config.noise, config.gates, q, sim.spam().rho, lengths);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sim.square_weight() * part[i];
  }
  return out;
}

Superoperator average_noise(const NoiseModel &noise) {
  if (const auto *k = std::get_if<KrausChannel>(&noise)) return to_superoperator(*k);
  return std::get<GateDependentNoise>(noise).average();
}

// ---------------------------------------------------------------------------

int default_workers() {
  if (const char *env = std::getenv("UNITARITY_WORKERS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)> &fn) {
  if (n == 0) return;
  const std::size_t count =
      std::min<std::size_t>(n, static_cast<std::size_t>(workers > 0 ? workers : default_workers()));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto &t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace unitarity
