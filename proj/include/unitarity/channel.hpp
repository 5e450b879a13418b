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

#ifndef UNITARITY_CHANNEL_HPP
#define UNITARITY_CHANNEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "unitarity/kernel.hpp"

namespace unitarity {

/*
 * Trace-orthonormal Hermitian operator basis {A_1, ..., A_{d^2}} with
 * A_1 = 1/sqrt(d) and every other element traceless.
 */
struct OperatorBasis {
  int dim = 0;
  std::vector<CMatrix> elements;
  std::string label;

  int size() const { return static_cast<int>(elements.size()); }
};

using BasisPtr = std::shared_ptr<const OperatorBasis>;

/*
 * Normalized n-qubit Paulis: identity first, then the remaining tensor
 * products in lexicographic (I, X, Y, Z)^n order. Cached per n, 1 <= n <= 3.
 */
BasisPtr pauli_basis(int n_qubits);

/// Pauli basis matching a Hilbert-space dimension d = 2^n.
BasisPtr pauli_basis_for_dim(int dim);

/// Completely positive map given by Kraus operators.
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<CMatrix> ops);

  int dim() const { return dim_; }
  const std::vector<CMatrix> &ops() const { return ops_; }

  CMatrix apply(const CMatrix &rho) const;
  /// sum_i K_i^dagger K_i
  CMatrix kraus_sum() const;
  bool trace_preserving() const;
  /// factor * channel, i.e. every Kraus operator scaled by sqrt(factor).
  KrausChannel scaled(double factor) const;

 private:
  int dim_ = 0;
  std::vector<CMatrix> ops_;
};

/// later o earlier, as a Kraus set of all pairwise products.
KrausChannel compose(const KrausChannel &later, const KrausChannel &earlier);

/// Unitary conjugation channel rho -> U rho U^dagger.
KrausChannel unitary_channel(const CMatrix &u);

/// Liouville matrix of a Hermiticity-preserving map in a Hermitian basis.
class Superoperator {
 public:
  /// Throws if the basis size and matrix shape disagree.
  Superoperator(BasisPtr basis, RMatrix matrix);

  int dim() const { return basis_->dim; }
  const OperatorBasis &basis() const { return *basis_; }
  const BasisPtr &basis_ptr() const { return basis_; }
  const RMatrix &matrix() const { return matrix_; }

  /// Coefficients (A_k | op) of a Hermitian operator.
  RVector vectorize(const CMatrix &op) const;
  CMatrix unvectorize(const RVector &coeffs) const;
  CMatrix apply(const CMatrix &rho) const;

 private:
  BasisPtr basis_;
  RMatrix matrix_;
};

/// Coefficients (A_k | op) of a Hermitian operator in the given basis.
RVector vectorize(const OperatorBasis &basis, const CMatrix &op);

/*
 * Entry (k, l) = Tr(A_k^dagger sum_i K_i A_l K_i^dagger). Throws
 * std::domain_error when any entry carries an imaginary part above 1e-12.
 */
Superoperator kraus_to_liouville(const KrausChannel &channel, BasisPtr basis);
/// Same, in the Pauli basis of matching dimension.
Superoperator kraus_to_liouville(const KrausChannel &channel);

Superoperator identity_superoperator(BasisPtr basis);
Superoperator compose(const Superoperator &later, const Superoperator &earlier);
Superoperator adjoint_channel(const Superoperator &s);
Superoperator scale(const Superoperator &s, double factor);
bool is_trace_preserving(const Superoperator &s, double tolerance = tol::kStructural);

/// [[S, sdl], [n, unital_block]] partition of a Liouville matrix.
struct BlockDecomposition {
  double survival = 0.0;
  RVector sdl;            // state-dependent leakage, first row without S
  RVector nonunital;      // first column without S
  RMatrix unital_block;   // lower-right (d^2-1) x (d^2-1)

  RMatrix reassemble() const;
};

BlockDecomposition block_decompose(const Superoperator &s);

/// J = (E (x) I)[Phi] with Phi = (1/d) sum_{jk} |jj><kk|.
struct ChoiState {
  CMatrix matrix;

  double trace() const { return matrix.trace().real(); }
  double purity() const { return (matrix.adjoint() * matrix).trace().real(); }
};

ChoiState jamiolkowski(const KrausChannel &channel);

struct CptpReport {
  bool cp = false;
  bool tp = false;
  bool tni = false;  // trace-non-increasing
  double min_choi_eigenvalue = 0.0;
  double tp_residual = 0.0;
  double max_kraus_sum_eigenvalue = 0.0;
};

CptpReport is_cptp(const KrausChannel &channel);

}  // namespace unitarity

#endif  // UNITARITY_CHANNEL_HPP
