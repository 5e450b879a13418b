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

#include "unitarity/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace unitarity {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fold_key(std::uint64_t seed, const std::vector<std::uint64_t> &key) {
  std::uint64_t h = splitmix64(seed);
  for (const auto word : key) h = splitmix64(h ^ splitmix64(word + 0x632be59bd9b4e019ULL));
  return h;
}

void check_probability(double p, const char *what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": probability must be in [0, 1]");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// RngStream

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> key)
    : RngStream(seed, std::vector<std::uint64_t>(key)) {}

RngStream::RngStream(std::uint64_t seed, const std::vector<std::uint64_t> &key)
    : seed_(seed), key_(key), engine_(fold_key(seed, key)) {}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> subkey) const {
  std::vector<std::uint64_t> key = key_;
  key.insert(key.end(), subkey.begin(), subkey.end());
  return RngStream(seed_, key);
}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RngStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::index: empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::uint64_t RngStream::binomial(std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  return std::binomial_distribution<std::uint64_t>(n, p)(engine_);
}

// ---------------------------------------------------------------------------
// GateDependentNoise

GateDependentNoise GateDependentNoise::after(const KrausChannel &base) const {
  GateDependentNoise out;
  out.errors.reserve(errors.size());
  for (const auto &e : errors) out.errors.push_back(compose(e, base));
  return out;
}

Superoperator GateDependentNoise::average() const {
  if (errors.empty()) throw std::invalid_argument("GateDependentNoise::average: no channels");
  const Superoperator first = kraus_to_liouville(errors.front());
  RMatrix sum = RMatrix::Zero(first.matrix().rows(), first.matrix().cols());
  for (const auto &e : errors) sum += kraus_to_liouville(e).matrix();
  return Superoperator(first.basis_ptr(), sum / static_cast<double>(errors.size()));
}

// ---------------------------------------------------------------------------
// Named channels

KrausChannel identity_channel(int d) { return KrausChannel({CMatrix::Identity(d, d)}); }

KrausChannel depolarizing(int d, double p) {
  check_probability(p, "depolarizing");
  if (d < 2) throw std::invalid_argument("depolarizing: d must be >= 2");
  // p Tr(rho) 1/d = (p/d) sum_{a,b} |a><b| rho |b><a|
  std::vector<CMatrix> ops;
  ops.push_back(std::sqrt(1.0 - p) * CMatrix::Identity(d, d));
  if (p > 0.0) {
    const double w = std::sqrt(p / d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        CMatrix unit = CMatrix::Zero(d, d);
        unit(a, b) = w;
        ops.push_back(unit);
      }
    }
  }
  return KrausChannel(std::move(ops));
}

KrausChannel reset_channel(double p) {
  check_probability(p, "reset_channel");
  CMatrix k0 = std::sqrt(1.0 - p) * CMatrix::Identity(2, 2);
  CMatrix k1 = CMatrix::Zero(2, 2);
  k1(0, 0) = std::sqrt(p);
  CMatrix k2 = CMatrix::Zero(2, 2);
  k2(0, 1) = std::sqrt(p);
  return KrausChannel({k0, k1, k2});
}

KrausChannel state_prep_channel() {
  CMatrix k0 = CMatrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  CMatrix k1 = CMatrix::Zero(2, 2);
  k1(0, 1) = 1.0;
  return KrausChannel({k0, k1});
}

KrausChannel filter_channel() {
  CMatrix k = CMatrix::Zero(2, 2);
  k(0, 0) = 1.0;
  return KrausChannel({k});
}

CMatrix rotation_matrix(const std::array<double, 3> &axis, double angle) {
  const double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (std::abs(norm - 1.0) > tol::kStructural) {
    throw std::invalid_argument("rotation_unitary: axis must have unit norm");
  }
  CMatrix generator = axis[0] * pauli(1) + axis[1] * pauli(2) + axis[2] * pauli(3);
  return std::cos(angle / 2.0) * CMatrix::Identity(2, 2) -
         Complex(0.0, std::sin(angle / 2.0)) * generator;
}

KrausChannel rotation_unitary(const std::array<double, 3> &axis, double angle) {
  return unitary_channel(rotation_matrix(axis, angle));
}

// ---------------------------------------------------------------------------
// Random ensembles

namespace {

CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, RngStream &rng) {
  CMatrix g(rows, cols);
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = Complex(s * rng.normal(), s * rng.normal());
  }
  return g;
}

}  // namespace

CMatrix haar_unitary(int d, RngStream &rng) {
  if (d < 2) throw std::invalid_argument("haar_unitary: d must be >= 2");
  const CMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  const CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  CVector phases(d);
  for (int k = 0; k < d; ++k) {
    const double mag = std::abs(r(k, k));
    phases(k) = mag > 0.0 ? r(k, k) / mag : Complex(1.0, 0.0);
  }
  return q * phases.asDiagonal();
}

CMatrix random_hermitian(int d, RngStream &rng) {
  const CMatrix g = ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

GateDependentNoise eigenvalue_perturbed_gates(const std::vector<CMatrix> &gates,
                                              double max_delta, RngStream &rng) {
  if (max_delta < 0.0) throw std::invalid_argument("eigenvalue_perturbed_gates: max_delta < 0");
  GateDependentNoise noise;
  noise.errors.reserve(gates.size());
  for (const auto &g : gates) {
    const auto eig = unitary_eigensystem(g);
    const double delta = max_delta > 0.0 ? rng.uniform(-max_delta, max_delta) : 0.0;
    CVector phases(2);
    phases(0) = std::polar(1.0, eig.phases(0) + delta);
    phases(1) = std::polar(1.0, eig.phases(1) - delta);
    const CMatrix perturbed = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
    noise.errors.push_back(unitary_channel(g.adjoint() * perturbed));
  }
  return noise;
}

KrausChannel bruzda_channel(int d, int kraus_rank, RngStream &rng) {
  if (kraus_rank < 1 || kraus_rank > d * d) {
    throw std::invalid_argument("bruzda_channel: kraus_rank must be in 1..d^2");
  }
  const CMatrix g = ginibre(d * d, kraus_rank, rng);
  const CMatrix w = g * g.adjoint();

  // Partial trace over the output (first) factor.
  CMatrix input_marginal = CMatrix::Zero(d, d);
  for (int a = 0; a < d; ++a) input_marginal += w.block(a * d, a * d, d, d);
  const auto marginal_eig = hermitian_eigensystem(input_marginal);
  CVector inv_sqrt(d);
  for (int k = 0; k < d; ++k) inv_sqrt(k) = 1.0 / std::sqrt(marginal_eig.values(k));
  const CMatrix inv_root = marginal_eig.vectors * inv_sqrt.asDiagonal() * marginal_eig.vectors.adjoint();
  const CMatrix lift = kron(CMatrix::Identity(d, d), inv_root);
  const CMatrix choi = lift * w * lift;

  const auto eig = hermitian_eigensystem(choi);
  std::vector<CMatrix> ops;
  ops.reserve(kraus_rank);
  for (int i = 0; i < kraus_rank; ++i) {
    const Eigen::Index col = eig.values.size() - 1 - i;  // largest first
    const double lambda = std::max(0.0, eig.values(col));
    CMatrix k(d, d);
    for (int a = 0; a < d; ++a) {
      for (int j = 0; j < d; ++j) k(a, j) = std::sqrt(lambda) * eig.vectors(a * d + j, col);
    }
    ops.push_back(std::move(k));
  }
  return KrausChannel(std::move(ops));
}

// ---------------------------------------------------------------------------
// Channel specifier parsing

namespace {

[[noreturn]] void bad_token(const std::string &token) {
  throw std::invalid_argument("unparseable channel spec token '" + token + "'");
}

double parse_number(const std::string &text, const std::string &token) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) bad_token(token);
    return value;
  } catch (const std::logic_error &) {
    bad_token(token);
  }
}

std::uint64_t parse_seed(const std::string &text, const std::string &token) {
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used != text.size()) bad_token(token);
    return value;
  } catch (const std::logic_error &) {
    bad_token(token);
  }
}

std::vector<std::string> split_top_level(const std::string &body) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string current;
  for (const char c : body) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace

KrausChannel parse_channel_spec(const std::string &spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (colon == std::string::npos) {
    if (head == "id") return identity_channel(2);
    if (head == "prep") return state_prep_channel();
    if (head == "filter") return filter_channel();
    bad_token(spec);
  }
  if (head == "dep") return depolarizing(2, parse_number(rest, spec));
  if (head == "reset") return reset_channel(parse_number(rest, spec));
  if (head == "rotX") return rotation_unitary({1, 0, 0}, parse_number(rest, spec));
  if (head == "rotY") return rotation_unitary({0, 1, 0}, parse_number(rest, spec));
  if (head == "rotZ") return rotation_unitary({0, 0, 1}, parse_number(rest, spec));
  if (head == "haar") {
    RngStream rng(parse_seed(rest, spec), {purpose(StreamPurpose::kHaar)});
    return unitary_channel(haar_unitary(2, rng));
  }
  if (head == "bruzda") {
    const auto sep = rest.find(':');
    if (sep == std::string::npos) bad_token(spec);
    const auto rank = parse_seed(rest.substr(0, sep), spec);
    RngStream rng(parse_seed(rest.substr(sep + 1), spec), {purpose(StreamPurpose::kBruzda)});
    return bruzda_channel(2, static_cast<int>(rank), rng);
  }
  if (head == "scale") {
    const auto sep = rest.find(':');
    if (sep == std::string::npos) bad_token(spec);
    return parse_channel_spec(rest.substr(sep + 1)).scaled(parse_number(rest.substr(0, sep), spec));
  }
  if (head == "compose") {
    if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']') bad_token(spec);
    const auto parts = split_top_level(rest.substr(1, rest.size() - 2));
    KrausChannel out = parse_channel_spec(parts.back());
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) {
      out = compose(parse_channel_spec(*it), out);
    }
    return out;
  }
  bad_token(spec);
}

}  // namespace unitarity
