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

#ifndef UNITARITY_DESIGN_HPP
#define UNITARITY_DESIGN_HPP

#include <string>
#include <vector>

#include "unitarity/channel.hpp"
#include "unitarity/metrics.hpp"

namespace unitarity {

/// Finite set of d x d unitaries sampled uniformly by the protocol.
class GateSet {
 public:
  /// Verifies unitarity of every element to 1e-12 and rejects phase duplicates.
  GateSet(std::vector<CMatrix> unitaries, std::string label);

  int dim() const { return dim_; }
  std::size_t size() const { return unitaries_.size(); }
  const std::string &label() const { return label_; }
  const std::vector<CMatrix> &unitaries() const { return unitaries_; }
  const CMatrix &operator[](std::size_t i) const { return unitaries_[i]; }

  /// Liouville matrices phi_L(g) in the Pauli basis, computed once.
  const std::vector<RMatrix> &liouville() const { return liouville_; }
  const BasisPtr &basis() const { return basis_; }

 private:
  int dim_ = 0;
  std::vector<CMatrix> unitaries_;
  std::string label_;
  BasisPtr basis_;
  std::vector<RMatrix> liouville_;
};

/// Multiplies by the phase that makes the first nonzero entry (column-major) real positive.
CMatrix canonical_phase(const CMatrix &u);

/// True when a = e^{i phi} b for some phi, judged on canonical forms to 1e-8.
bool equal_up_to_phase(const CMatrix &a, const CMatrix &b);

/// The 24-element single-qubit Clifford group, closed from H and S.
GateSet clifford_1q();

/// The four Paulis (a unitary 1-design but not a 2-design).
GateSet pauli_group_1q();

/// |G|^-2 sum_{g,h} |Tr(g^dagger h)|^4; equals 2 exactly for a unitary 2-design.
double frame_potential_2(const GateSet &gates);

/// |G|^-1 sum_g phi_L(g) (x) phi_L(g) on the two-copy Liouville space.
RMatrix twirl_projector_2copy(const GateSet &gates);

/// |G|^-1 sum_g phi_L(g).
RMatrix twirl_1copy(const GateSet &gates);

struct AveragedOperator {
  RMatrix full;         // T (E (x) E) T
  MMatrix restriction;  // (B_j | full | B_k)
};

AveragedOperator averaged_operator(const GateSet &gates, const Superoperator &noise);

}  // namespace unitarity

#endif  // UNITARITY_DESIGN_HPP
