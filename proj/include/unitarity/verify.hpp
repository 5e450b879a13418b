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

#ifndef UNITARITY_VERIFY_HPP
#define UNITARITY_VERIFY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace unitarity {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> values;  // residuals and measured quantities
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Multiplies every tolerance (and every sigma or CI half-width); < 1 tightens.
  double tolerance_scale = 1.0;
  std::uint64_t seed = 20260101;
  int workers = 0;
};

// Acceptance criteria, numbered 1 to 11.
CheckResult check_oracle_equivalence(const VerifyOptions &options);      // 1
CheckResult check_fit_functional_form(const VerifyOptions &options);     // 2
CheckResult check_nonunital_decay_fits(const VerifyOptions &options);    // 3
CheckResult check_unitary_noise_flat(const VerifyOptions &options);      // 4
CheckResult check_random_channel_properties(const VerifyOptions &options);  // 5
CheckResult check_infidelity_chain_suite(const VerifyOptions &options);  // 6
CheckResult check_nonmonotonicity_witness(const VerifyOptions &options);  // 7
CheckResult check_clifford_2design(const VerifyOptions &options);        // 8
CheckResult check_rank_ensembles(const VerifyOptions &options);          // 9
CheckResult check_estimator_unbiasedness(const VerifyOptions &options);  // 10
CheckResult check_loss_and_variance(const VerifyOptions &options);       // 11

using CheckFn = std::function<CheckResult(const VerifyOptions &)>;

/// (id, function) for every acceptance criterion in order.
const std::vector<std::pair<int, CheckFn>> &acceptance_checks();
std::vector<CheckResult> run_acceptance(const VerifyOptions &options);

/// Fast subset: frame potential, Jamiolkowski identity on 100 channels, oracle for m <= 2.
std::vector<CheckResult> run_quick_checks(const VerifyOptions &options);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double> &x, const std::vector<double> &y);

}  // namespace unitarity

#endif  // UNITARITY_VERIFY_HPP
