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

#include "unitarity/channel.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

namespace unitarity {

namespace {

BasisPtr build_pauli_basis(int n_qubits) {
  auto basis = std::make_shared<OperatorBasis>();
  basis->dim = 1 << n_qubits;
  basis->label = "pauli";
  const int count = 1 << (2 * n_qubits);
  const double norm = 1.0 / std::sqrt(static_cast<double>(basis->dim));
  basis->elements.reserve(count);
  // Index digits in base 4, most significant first, give the lexicographic
  // (I, X, Y, Z)^n order with the all-identity element at index 0.
  for (int index = 0; index < count; ++index) {
    CMatrix op = CMatrix::Identity(1, 1);
    for (int q = n_qubits - 1; q >= 0; --q) {
      op = kron(op, pauli((index >> (2 * q)) & 3));
    }
    basis->elements.push_back(norm * op);
  }
  return basis;
}

}  // namespace

BasisPtr pauli_basis(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 3) {
    throw std::invalid_argument("pauli_basis: n_qubits must be in 1..3, got " +
                                std::to_string(n_qubits));
  }
  static std::array<BasisPtr, 4> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  if (!cache[n_qubits]) cache[n_qubits] = build_pauli_basis(n_qubits);
  return cache[n_qubits];
}

BasisPtr pauli_basis_for_dim(int dim) {
  int n = 0;
  while ((1 << n) < dim) ++n;
  if ((1 << n) != dim) {
    throw std::invalid_argument("only qubit dimensions 2^n are supported, got " +
                                std::to_string(dim));
  }
  return pauli_basis(n);
}

// ---------------------------------------------------------------------------
// KrausChannel

KrausChannel::KrausChannel(std::vector<CMatrix> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw std::invalid_argument("KrausChannel: empty Kraus set");
  dim_ = static_cast<int>(ops_.front().rows());
  for (const auto &k : ops_) {
    if (k.rows() != dim_ || k.cols() != dim_) {
      throw std::invalid_argument("KrausChannel: Kraus operators must be square and equal-sized");
    }
    if (!all_finite(k)) throw std::invalid_argument("KrausChannel: non-finite entry");
  }
}

CMatrix KrausChannel::apply(const CMatrix &rho) const {
  CMatrix out = CMatrix::Zero(dim_, dim_);
  for (const auto &k : ops_) out += k * rho * k.adjoint();
  return out;
}

CMatrix KrausChannel::kraus_sum() const {
  CMatrix out = CMatrix::Zero(dim_, dim_);
  for (const auto &k : ops_) out += k.adjoint() * k;
  return out;
}

bool KrausChannel::trace_preserving() const {
  return (kraus_sum() - CMatrix::Identity(dim_, dim_)).norm() < tol::kStructural;
}

KrausChannel KrausChannel::scaled(double factor) const {
  if (factor < 0.0) throw std::invalid_argument("KrausChannel::scaled: negative factor");
  std::vector<CMatrix> ops;
  ops.reserve(ops_.size());
  for (const auto &k : ops_) ops.push_back(std::sqrt(factor) * k);
  return KrausChannel(std::move(ops));
}

KrausChannel compose(const KrausChannel &later, const KrausChannel &earlier) {
  if (later.dim() != earlier.dim()) throw std::invalid_argument("compose: dimension mismatch");
  std::vector<CMatrix> ops;
  ops.reserve(later.ops().size() * earlier.ops().size());
  for (const auto &a : later.ops()) {
    for (const auto &b : earlier.ops()) ops.push_back(a * b);
  }
  return KrausChannel(std::move(ops));
}

KrausChannel unitary_channel(const CMatrix &u) { return KrausChannel({u}); }

// ---------------------------------------------------------------------------
// Superoperator

Superoperator::Superoperator(BasisPtr basis, RMatrix matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  if (!basis_) throw std::invalid_argument("Superoperator: null basis");
  const int n = basis_->size();
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw std::invalid_argument("Superoperator: matrix shape does not match basis size");
  }
  if (!matrix_.allFinite()) throw std::invalid_argument("Superoperator: non-finite entry");
}

RVector vectorize(const OperatorBasis &basis, const CMatrix &op) {
  RVector out(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    const Complex c = hs_inner(basis.elements[k], op);
    if (std::abs(c.imag()) > tol::kStructural * std::max(1.0, op.norm())) {
      throw std::domain_error("vectorize: operator is not Hermitian");
    }
    out(k) = c.real();
  }
  return out;
}

RVector Superoperator::vectorize(const CMatrix &op) const {
  return unitarity::vectorize(*basis_, op);
}

CMatrix Superoperator::unvectorize(const RVector &coeffs) const {
  CMatrix out = CMatrix::Zero(dim(), dim());
  for (int k = 0; k < basis_->size(); ++k) out += coeffs(k) * basis_->elements[k];
  return out;
}

CMatrix Superoperator::apply(const CMatrix &rho) const {
  return unvectorize(matrix_ * vectorize(rho));
}

Superoperator kraus_to_liouville(const KrausChannel &channel, BasisPtr basis) {
  if (!basis || basis->dim != channel.dim()) {
    throw std::invalid_argument("kraus_to_liouville: basis dimension does not match channel");
  }
  const int n = basis->size();
  RMatrix out(n, n);
  for (int l = 0; l < n; ++l) {
    const CMatrix image = channel.apply(basis->elements[l]);
    for (int k = 0; k < n; ++k) {
      const Complex entry = hs_inner(basis->elements[k], image);
      if (std::abs(entry.imag()) > tol::kEquality) {
        throw std::domain_error("kraus_to_liouville: imaginary residue " +
                                std::to_string(entry.imag()) + " exceeds tolerance");
      }
      out(k, l) = entry.real();
    }
  }
  return Superoperator(std::move(basis), std::move(out));
}

Superoperator kraus_to_liouville(const KrausChannel &channel) {
  return kraus_to_liouville(channel, pauli_basis_for_dim(channel.dim()));
}

Superoperator identity_superoperator(BasisPtr basis) {
  const int n = basis->size();
  return Superoperator(std::move(basis), RMatrix::Identity(n, n));
}

Superoperator compose(const Superoperator &later, const Superoperator &earlier) {
  if (later.dim() != earlier.dim() || later.basis().label != earlier.basis().label) {
    throw std::invalid_argument("compose: superoperators act on different spaces");
  }
  return Superoperator(later.basis_ptr(), later.matrix() * earlier.matrix());
}

Superoperator adjoint_channel(const Superoperator &s) {
  return Superoperator(s.basis_ptr(), s.matrix().transpose());
}

Superoperator scale(const Superoperator &s, double factor) {
  return Superoperator(s.basis_ptr(), factor * s.matrix());
}

bool is_trace_preserving(const Superoperator &s, double tolerance) {
  // TP iff the first row is e_1^T: (A_1 | E(A_l)) = Tr(A_l)/sqrt(d) for every l.
  RVector first = RVector::Zero(s.matrix().cols());
  first(0) = 1.0;
  return (s.matrix().row(0).transpose() - first).norm() < tolerance;
}

RMatrix BlockDecomposition::reassemble() const {
  const Eigen::Index n = unital_block.rows() + 1;
  RMatrix out(n, n);
  out(0, 0) = survival;
  out.block(0, 1, 1, n - 1) = sdl.transpose();
  out.block(1, 0, n - 1, 1) = nonunital;
  out.block(1, 1, n - 1, n - 1) = unital_block;
  return out;
}

BlockDecomposition block_decompose(const Superoperator &s) {
  const RMatrix &m = s.matrix();
  const Eigen::Index n = m.rows();
  BlockDecomposition out;
  out.survival = m(0, 0);
  out.sdl = m.block(0, 1, 1, n - 1).transpose();
  out.nonunital = m.block(1, 0, n - 1, 1);
  out.unital_block = m.block(1, 1, n - 1, n - 1);
  return out;
}

ChoiState jamiolkowski(const KrausChannel &channel) {
  const int d = channel.dim();
  CMatrix j = CMatrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      CMatrix unit = CMatrix::Zero(d, d);
      unit(a, b) = 1.0;
      j += kron(channel.apply(unit), unit);
    }
  }
  return {j / static_cast<double>(d)};
}

CptpReport is_cptp(const KrausChannel &channel) {
  CptpReport report;
  const ChoiState choi = jamiolkowski(channel);
  report.min_choi_eigenvalue = hermitian_eigensystem(choi.matrix).values.minCoeff();
  report.cp = report.min_choi_eigenvalue > -tol::kStructural;

  const CMatrix sum = channel.kraus_sum();
  report.tp_residual = (sum - CMatrix::Identity(channel.dim(), channel.dim())).norm();
  report.tp = report.tp_residual < tol::kStructural;
  report.max_kraus_sum_eigenvalue = hermitian_eigensystem(sum).values.maxCoeff();
  report.tni = report.max_kraus_sum_eigenvalue <= 1.0 + tol::kStructural;
  return report;
}

}  // namespace unitarity
