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

#include "unitarity/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace unitarity {

CMatrix pauli(int index) {
  const Complex i(0.0, 1.0);
  CMatrix p(2, 2);
  switch (index) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, -i, i, 0; break;
    case 3: p << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli index must be in 0..3");
  }
  return p;
}

CMatrix matmul(const CMatrix &a, const CMatrix &b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch (" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + ")");
  }
  return a * b;
}

Complex hs_inner(const CMatrix &a, const CMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hs_inner: shape mismatch");
  }
  return (a.adjoint() * b).trace();
}

bool all_finite(const CMatrix &a) {
  return a.array().real().allFinite() && a.array().imag().allFinite();
}

bool is_hermitian(const CMatrix &a, double tolerance) {
  return a.rows() == a.cols() && (a - a.adjoint()).norm() < tolerance;
}

bool is_unitary(const CMatrix &a, double tolerance) {
  if (a.rows() != a.cols()) return false;
  return (a.adjoint() * a - CMatrix::Identity(a.rows(), a.cols())).norm() < tolerance;
}

HermitianEigensystem hermitian_eigensystem(const CMatrix &a) {
  if (!is_hermitian(a)) {
    throw std::invalid_argument("hermitian_eigensystem: input is not Hermitian");
  }
  // Symmetrize so round-off in the lower triangle cannot leak into the solver.
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eigensystem: solver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

UnitaryEigensystem unitary_eigensystem(const CMatrix &u) {
  if (u.rows() != 2 || u.cols() != 2) {
    throw std::invalid_argument("unitary_eigensystem: only 2x2 unitaries are supported");
  }
  if (!is_unitary(u)) {
    throw std::invalid_argument("unitary_eigensystem: input is not unitary");
  }
  const Complex global = std::sqrt(u.determinant());
  const CMatrix v = u / global;
  const CMatrix generator = Complex(0.0, 0.5) * (v - v.adjoint());

  CMatrix vectors = CMatrix::Identity(2, 2);
  if (generator.norm() > tol::kEquality) {
    vectors = hermitian_eigensystem(generator).vectors;
  }

  std::vector<double> phases(2);
  for (int k = 0; k < 2; ++k) {
    const Complex eig = (vectors.col(k).adjoint() * u * vectors.col(k))(0, 0);
    phases[k] = std::arg(eig);
  }
  std::vector<int> order{0, 1};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return phases[x] < phases[y]; });

  UnitaryEigensystem out{RVector(2), CMatrix(2, 2)};
  for (int k = 0; k < 2; ++k) {
    out.phases(k) = phases[order[k]];
    out.vectors.col(k) = vectors.col(order[k]);
  }
  return out;
}

CMatrix unitary_exp(const CMatrix &h, double angle) {
  const auto eig = hermitian_eigensystem(h);
  CVector phases(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    phases(k) = std::polar(1.0, -angle * eig.values(k));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace unitarity
