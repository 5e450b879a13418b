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

#include "unitarity/design.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace unitarity {

namespace {
constexpr double kPhaseDedupTolerance = 1e-8;
}  // namespace

GateSet::GateSet(std::vector<CMatrix> unitaries, std::string label)
    : unitaries_(std::move(unitaries)), label_(std::move(label)) {
  if (unitaries_.empty()) throw std::invalid_argument("GateSet: empty gate set");
  dim_ = static_cast<int>(unitaries_.front().rows());
  for (std::size_t i = 0; i < unitaries_.size(); ++i) {
    if (unitaries_[i].rows() != dim_ || !is_unitary(unitaries_[i], tol::kEquality)) {
      throw std::invalid_argument("GateSet: element " + std::to_string(i) + " is not a " +
                                  std::to_string(dim_) + "x" + std::to_string(dim_) + " unitary");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (equal_up_to_phase(unitaries_[i], unitaries_[j])) {
        throw std::invalid_argument("GateSet: elements " + std::to_string(j) + " and " +
                                    std::to_string(i) + " agree up to phase");
      }
    }
  }
  basis_ = pauli_basis_for_dim(dim_);
  liouville_.reserve(unitaries_.size());
  for (const auto &u : unitaries_) {
    liouville_.push_back(kraus_to_liouville(unitary_channel(u), basis_).matrix());
  }
}

CMatrix canonical_phase(const CMatrix &u) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double mag = std::abs(u(i, j));
      if (mag > kPhaseDedupTolerance) return u * (std::conj(u(i, j)) / mag);
    }
  }
  return u;
}

bool equal_up_to_phase(const CMatrix &a, const CMatrix &b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (canonical_phase(a) - canonical_phase(b)).norm() < kPhaseDedupTolerance;
}

GateSet clifford_1q() {
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix h(2, 2);
  h << s, s, s, -s;
  CMatrix phase(2, 2);
  phase << 1, 0, 0, Complex(0.0, 1.0);
  const std::vector<CMatrix> generators{h, phase};

  std::vector<CMatrix> elements{CMatrix::Identity(2, 2)};
  std::deque<CMatrix> frontier{elements.front()};
  while (!frontier.empty()) {
    const CMatrix current = frontier.front();
    frontier.pop_front();
    for (const auto &g : generators) {
      const CMatrix candidate = canonical_phase(g * current);
      bool seen = false;
      for (const auto &e : elements) {
        if ((e - candidate).norm() < kPhaseDedupTolerance) {
          seen = true;
          break;
        }
      }
      if (!seen) {
        elements.push_back(candidate);
        frontier.push_back(candidate);
      }
    }
  }
  return GateSet(std::move(elements), "clifford_1q");
}

GateSet pauli_group_1q() {
  return GateSet({pauli(0), pauli(1), pauli(2), pauli(3)}, "pauli_1q");
}

double frame_potential_2(const GateSet &gates) {
  double total = 0.0;
  for (const auto &g : gates.unitaries()) {
    for (const auto &h : gates.unitaries()) total += std::pow(std::norm(hs_inner(g, h)), 2);
  }
  const double n = static_cast<double>(gates.size());
  return total / (n * n);
}

RMatrix twirl_projector_2copy(const GateSet &gates) {
  const Eigen::Index n = gates.liouville().front().rows();
  RMatrix sum = RMatrix::Zero(n * n, n * n);
  for (const auto &l : gates.liouville()) sum += kron(l, l);
  return sum / static_cast<double>(gates.size());
}

RMatrix twirl_1copy(const GateSet &gates) {
  const Eigen::Index n = gates.liouville().front().rows();
  RMatrix sum = RMatrix::Zero(n, n);
  for (const auto &l : gates.liouville()) sum += l;
  return sum / static_cast<double>(gates.size());
}

AveragedOperator averaged_operator(const GateSet &gates, const Superoperator &noise) {
  if (noise.dim() != gates.dim()) {
    throw std::invalid_argument("averaged_operator: noise and gate set dimensions differ");
  }
  const RMatrix twirl = twirl_projector_2copy(gates);
  AveragedOperator out;
  out.full = twirl * kron(noise.matrix(), noise.matrix()) * twirl;
  const auto inv = invariant_basis(noise.basis_ptr());
  out.restriction.m11 = inv.v1.dot(out.full * inv.v1);
  out.restriction.m12 = inv.v1.dot(out.full * inv.v2);
  out.restriction.m21 = inv.v2.dot(out.full * inv.v1);
  out.restriction.m22 = inv.v2.dot(out.full * inv.v2);
  return out;
}

}  // namespace unitarity
