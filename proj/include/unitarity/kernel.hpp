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

#ifndef UNITARITY_KERNEL_HPP
#define UNITARITY_KERNEL_HPP

#include <complex>
#include <type_traits>

#include <Eigen/Dense>

namespace unitarity {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace tol {
/// Hermiticity, unitarity, trace-preservation and positivity checks.
inline constexpr double kStructural = 1e-10;
/// Exact-identity assertions.
inline constexpr double kEquality = 1e-12;
}  // namespace tol

/// Single-qubit Pauli matrix: 0 = I, 1 = X, 2 = Y, 3 = Z.
CMatrix pauli(int index);

/// Matrix product; throws std::invalid_argument on a dimension mismatch.
CMatrix matmul(const CMatrix &a, const CMatrix &b);

/*
 * Kronecker product with the row-major block convention,
 *
 *   kron(a, b)(i*p + k, j*q + l) = a(i, j) * b(k, l)
 *
 * where b is p x q. Works on any pair of dense expressions sharing a scalar.
 */
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<DerivedA> &a, const Eigen::MatrixBase<DerivedB> &b) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "kron operands must share a scalar type");
  using Result = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index p = b.rows();
  const Eigen::Index q = b.cols();
  Result out(a.rows() * p, a.cols() * q);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * p, j * q, p, q) = a(i, j) * b;
    }
  }
  return out;
}

/// Hilbert-Schmidt inner product Tr(a^dagger b).
Complex hs_inner(const CMatrix &a, const CMatrix &b);

bool all_finite(const CMatrix &a);
bool is_hermitian(const CMatrix &a, double tolerance = tol::kStructural);
bool is_unitary(const CMatrix &a, double tolerance = tol::kStructural);

struct HermitianEigensystem {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix; throws on non-Hermitian input.
HermitianEigensystem hermitian_eigensystem(const CMatrix &a);

struct UnitaryEigensystem {
  RVector phases;   // ascending, each in (-pi, pi]
  CMatrix vectors;  // u = sum_k exp(i phases_k) v_k v_k^dagger
};

/*
 * Closed-form eigendecomposition of a 2x2 unitary. The eigenvectors are those
 * of the Hermitian part i(V - V^dagger)/2 of the determinant-normalized
 * matrix V, which shares an eigenbasis with u. A scalar unitary returns the
 * computational basis.
 */
UnitaryEigensystem unitary_eigensystem(const CMatrix &u);

/// exp(-i * angle * h) for Hermitian h, via its eigensystem.
CMatrix unitary_exp(const CMatrix &h, double angle);

}  // namespace unitarity

#endif  // UNITARITY_KERNEL_HPP
