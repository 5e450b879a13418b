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

#ifndef UNITARITY_OPTIMIZE_HPP
#define UNITARITY_OPTIMIZE_HPP

#include <functional>

#include "unitarity/kernel.hpp"

namespace unitarity::optimize {

struct SimplexOptions {
  double initial_step = 0.5;
  double diameter_tolerance = 1e-9;
  int max_evaluations = 20000;
};

struct SimplexResult {
  RVector x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimization; stops once the simplex diameter drops below tolerance.
SimplexResult nelder_mead(const std::function<double(const RVector &)> &f, const RVector &x0,
                          const SimplexOptions &options = {});

}  // namespace unitarity::optimize

#endif  // UNITARITY_OPTIMIZE_HPP
