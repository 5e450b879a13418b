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

#ifndef UNITARITY_FITMODEL_HPP
#define UNITARITY_FITMODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unitarity/rbsim.hpp"

namespace unitarity {

/// Points to fit. Empty or non-positive sigma means uniform weights.
struct FitData {
  std::vector<double> m;
  std::vector<double> y;
  std::vector<double> sigma;

  static FitData from_dataset(const DecayDataset &data);
};

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-12;
  int bootstrap_samples = 0;  // > 0 replaces linearized CIs by percentile bootstrap (needs raw records)
  std::uint64_t bootstrap_seed = 1;
};

struct FitParameter {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;  // 95%
  double ci_high = 0.0;
};

struct FitResult {
  std::string model;  // "tp", "td" or "loss"
  std::vector<FitParameter> params;
  RMatrix covariance;  // natural parameters, in `params` order
  double rms_residual = 0.0;
  double cost = 0.0;  // 1/2 sum w (y - f)^2
  bool converged = false;
  int iterations = 0;
  std::vector<double> cost_history;  // after each accepted step, starting from the seed
  double condition_number = 0.0;     // of J^T W J in natural parameters
  std::optional<double> lambda_sum;  // td only
  bool fallback = false;             // td request answered with the tp model
  std::vector<std::string> warnings;

  /// Throws std::out_of_range for an unknown name.
  const FitParameter &param(const std::string &name) const;
  double value(const std::string &name) const { return param(name).value; }
  /// Model prediction at length m.
  double predict(double m) const;
};

/// A + B u^{m-1} with u constrained to [0, 1].
FitResult fit_tp_decay(const FitData &data, const FitOptions &options = {});
FitResult fit_tp_decay(const DecayDataset &data, const FitOptions &options = {});

/*
 * A lambda_+^{m-1} + B lambda_-^{m-1} with 0 <= lambda_- <= lambda_+ <= 1.
 * Falls back to the tp model (fallback = true, warning added) when the two
 * rates are not separately identifiable.
 */
FitResult fit_td_decay(const FitData &data, const FitOptions &options = {});
FitResult fit_td_decay(const DecayDataset &data, const FitOptions &options = {});

/// C S^{m-1} with S in [0, 1].
FitResult loss_fit(const FitData &data, const FitOptions &options = {});
FitResult loss_fit(const DecayDataset &data, const FitOptions &options = {});

}  // namespace unitarity

#endif  // UNITARITY_FITMODEL_HPP
