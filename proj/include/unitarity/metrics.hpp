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

#ifndef UNITARITY_METRICS_HPP
#define UNITARITY_METRICS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "unitarity/channel.hpp"

namespace unitarity {

// ---------------------------------------------------------------------------
// Scalar figures of merit

/// Tr(E_u^T E_u) / (d^2 - 1) over the unital block.
double unitarity(const Superoperator &s);

/// The (1,1) Liouville entry, i.e. the Haar-averaged surviving trace.
double survival_rate(const Superoperator &s);

/*
 * Average gate infidelity 1 - (Tr L + d) / (d^2 + d). The closed form holds
 * for trace-preserving maps; when `warnings` is given and the map is not TP a
 * message is appended.
 */
double average_infidelity(const Superoperator &s, std::vector<std::string> *warnings = nullptr);

/// Qubit rotation matrix in SO(3) from ZYZ Euler angles (alpha, beta, gamma).
RMatrix euler_rotation(double alpha, double beta, double gamma);

/*
 * Upper bound on min_{U,V} r(V o E o U) for qubits: multi-start Nelder-Mead
 * over the six Euler angles of U and V. The first start is U = V = 1, so the
 * result never exceeds r(E). Throws for d != 2.
 */
double optimized_infidelity(const Superoperator &s, int restarts = 20,
                            std::uint64_t seed = 0x5eedULL);

/// Lower bound (d-1)/d * (1 - sqrt(u)) on the optimized infidelity.
double optimized_infidelity_lower_bound(const Superoperator &s);

// ---------------------------------------------------------------------------
// Averaged two-copy operator

/// Restriction of the averaged two-copy operator to the invariant {B1, B2} basis.
struct MMatrix {
  double m11 = 0.0;
  double m12 = 0.0;
  double m21 = 0.0;
  double m22 = 0.0;

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << m11, m12, m21, m22;
    return m;
  }
};

MMatrix m_matrix(const Superoperator &s);

/// (lambda_plus, lambda_minus); throws std::domain_error on a negative discriminant.
std::pair<double, double> decay_eigenvalues(const MMatrix &m);

/// d x d SWAP on C^d (x) C^d.
CMatrix swap_operator(int d);

/// Coefficients Tr((A_k (x) A_l)^dagger X), flattened as k * d^2 + l.
RVector two_copy_vector(const OperatorBasis &basis, const CMatrix &op);

/// B1 = 1/d and B2 = (S - 1/d) / sqrt(d^2 - 1) together with their two-copy vectors.
struct InvariantBasis {
  CMatrix b1;
  CMatrix b2;
  RVector v1;
  RVector v2;

  /// Orthogonal projector v1 v1^T + v2 v2^T on the two-copy Liouville space.
  RMatrix projector() const { return v1 * v1.transpose() + v2 * v2.transpose(); }
};

InvariantBasis invariant_basis(const BasisPtr &basis);

/// Maximally mixed states on the symmetric/antisymmetric subspaces and their projectors.
struct ProbeStates {
  CMatrix pi_s;
  CMatrix pi_a;
  CMatrix e_s;
  CMatrix e_a;
};

ProbeStates probe_states(int d);

/// (p_as, p_sa) from the closed forms in S, u and the block norms.
std::pair<double, double> probe_probabilities(const Superoperator &s);

/// (p_as, p_sa) from contracting P (E (x) E) P with the probe vectors directly.
std::pair<double, double> probe_probabilities_contracted(const Superoperator &s);

// ---------------------------------------------------------------------------
// Bound checks

struct NormBoundReport {
  double nonunital_residual = 0.0;  // bound - ||n||^2
  double sdl_residual = 0.0;        // bound - ||sdl||^2
  bool tp = false;
  double tp_residual = 0.0;         // (d-1)(1-u) - ||n||^2, TP only
  bool passed = false;
};

NormBoundReport check_norm_bounds(const Superoperator &s);

struct InfidelityChainReport {
  double unitarity = 0.0;
  double optimized_infidelity = 0.0;
  double infidelity = 0.0;
  double first_residual = 0.0;   // u - (1 - dR/(d-1))^2
  double second_residual = 0.0;  // (1 - dR/(d-1))^2 - (1 - dr/(d-1))^2
  bool second_applicable = false;  // r <= (d-1)/d
  bool passed = false;
};

InfidelityChainReport check_infidelity_chain(const Superoperator &s, int restarts = 20,
                                             double tolerance = 1e-8);

struct JamiolkowskiReport {
  double lhs = 0.0;  // d^2 Tr(J^dagger J)
  double rhs = 0.0;  // S^2 + ||sdl||^2 + ||n||^2 + (d^2 - 1) u
  double residual = 0.0;
  bool passed = false;
};

JamiolkowskiReport check_jamiolkowski_identity(const KrausChannel &channel);

/// u(second o first).
double composition_unitarity(const Superoperator &first, const Superoperator &second);

// ---------------------------------------------------------------------------
// Aggregate report

struct ChannelReport {
  int d = 0;
  double unitarity = 0.0;
  double survival = 0.0;
  double infidelity = 0.0;
  double optimized_infidelity_upper = 0.0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  NormBoundReport norm_bounds;
  InfidelityChainReport chain;
  double jamiolkowski_residual = 0.0;
  std::vector<std::string> warnings;
};

ChannelReport channel_report(const KrausChannel &channel, int restarts = 20);

}  // namespace unitarity

#endif  // UNITARITY_METRICS_HPP
