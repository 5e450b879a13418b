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

#ifndef UNITARITY_ENSEMBLES_HPP
#define UNITARITY_ENSEMBLES_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "unitarity/channel.hpp"

namespace unitarity {

/// Purpose tags that keep independent consumers on disjoint streams.
enum class StreamPurpose : std::uint64_t {
  kHaar = 1,
  kBruzda = 2,
  kSequence = 3,
  kShots = 4,
  kSpam = 5,
  kPerturbation = 6,
  kEnsembleScan = 7,
  kVerification = 8,
};

/*
 * Deterministic random stream keyed by (seed, key...). The key words are
 * folded through SplitMix64 into the seed of a 64-bit Mersenne Twister, so
 * the same (seed, key) always reproduces the same draws and distinct keys
 * give unrelated streams regardless of which thread consumes them.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> key = {});
  RngStream(std::uint64_t seed, const std::vector<std::uint64_t> &key);

  /// Child stream with the given words appended to this stream's key.
  RngStream derive(std::initializer_list<std::uint64_t> subkey) const;

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t> &key() const { return key_; }

  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // N(0, 1)
  std::size_t index(std::size_t n);        // uniform in [0, n)
  std::uint64_t binomial(std::uint64_t n, double p);

  std::mt19937_64 &engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> key_;
  std::mt19937_64 engine_;
};

inline std::uint64_t purpose(StreamPurpose p) { return static_cast<std::uint64_t>(p); }

/// Error channels E_g indexed like the gate set; the implemented gate is U_g o E_g.
struct GateDependentNoise {
  std::vector<KrausChannel> errors;

  /// Every E_g replaced by E_g o base.
  GateDependentNoise after(const KrausChannel &base) const;
  /// Gate-averaged channel |G|^-1 sum_g E_g in the Liouville representation.
  Superoperator average() const;
};

// ---------------------------------------------------------------------------
// Named channels

/// rho -> (1 - p) rho + p 1/d
KrausChannel depolarizing(int d, double p);
/// rho -> p Tr(rho) |0><0| + (1 - p) rho (qubit)
KrausChannel reset_channel(double p);
/// rho -> Tr(rho) |0><0|
KrausChannel state_prep_channel();
/// rho -> |0><0| rho |0><0|
KrausChannel filter_channel();
KrausChannel identity_channel(int d);

/// cos(angle/2) 1 - i sin(angle/2) (axis . sigma); axis must have unit norm.
CMatrix rotation_matrix(const std::array<double, 3> &axis, double angle);
KrausChannel rotation_unitary(const std::array<double, 3> &axis, double angle);

// ---------------------------------------------------------------------------
// Random ensembles

/// Ginibre matrix + QR with the phases of diag(R) divided out.
CMatrix haar_unitary(int d, RngStream &rng);

/// Hermitian matrix with independent Gaussian entries (GUE, unnormalized).
CMatrix random_hermitian(int d, RngStream &rng);

/*
 * Systematic over/under-rotation errors: gate g = sum_k e^{i theta_k} v_k v_k^dagger
 * is implemented as g' with phases theta_1 + delta, theta_2 - delta, delta drawn
 * once per gate from Uniform[-max_delta, max_delta]. The stored error channel is
 * conjugation by g^dagger g'. Qubit gates only.
 */
GateDependentNoise eigenvalue_perturbed_gates(const std::vector<CMatrix> &gates,
                                              double max_delta, RngStream &rng);

/*
 * Random CPTP map of the given Kraus rank: Wishart W = G G^dagger from a
 * d^2 x rank Ginibre G, normalized as (1 (x) D) W (1 (x) D) with
 * D = (Tr_out W)^{-1/2}, Kraus operators read off its eigendecomposition.
 */
KrausChannel bruzda_channel(int d, int kraus_rank, RngStream &rng);

/*
 * Parses a channel specifier:
 *   id | dep:p | reset:p | prep | filter | rotX:theta | rotY:theta | rotZ:theta
 *   haar:seed | bruzda:rank:seed | scale:factor:<spec> | compose:[a,b,...]
 * compose:[a,b] is a o b (b acts first). All named channels are single-qubit.
 * Throws std::invalid_argument naming the offending token.
 */
KrausChannel parse_channel_spec(const std::string &spec);

}  // namespace unitarity

#endif  // UNITARITY_ENSEMBLES_HPP
