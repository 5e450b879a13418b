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

#include "unitarity/optimize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace unitarity::optimize {

SimplexResult nelder_mead(const std::function<double(const RVector &)> &f, const RVector &x0,
                          const SimplexOptions &options) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const Eigen::Index n = x0.size();
  std::vector<RVector> vertices(n + 1, x0);
  for (Eigen::Index i = 0; i < n; ++i) vertices[i + 1](i) += options.initial_step;

  SimplexResult result;
  auto eval = [&](const RVector &x) {
    ++result.evaluations;
    return f(x);
  };
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) values[i] = eval(vertices[i]);

  std::vector<Eigen::Index> order(n + 1);
  while (result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
    const Eigen::Index best = order.front();
    const Eigen::Index worst = order.back();
    const Eigen::Index second_worst = order[n - 1];

    double diameter = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i) {
      diameter = std::max(diameter, (vertices[i] - vertices[best]).lpNorm<Eigen::Infinity>());
    }
    if (diameter < options.diameter_tolerance) {
      result.converged = true;
      break;
    }

    RVector centroid = RVector::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i != worst) centroid += vertices[i];
    }
    centroid /= static_cast<double>(n);

    const RVector reflected = centroid + kReflect * (centroid - vertices[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const RVector expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        vertices[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        vertices[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      vertices[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }

    const bool outside = f_reflected < values[worst];
    const RVector contracted = outside ? RVector(centroid + kContract * (reflected - centroid))
                                       : RVector(centroid + kContract * (vertices[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      vertices[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }

    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      vertices[i] = vertices[best] + kShrink * (vertices[i] - vertices[best]);
      values[i] = eval(vertices[i]);
    }
  }

  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  result.x = vertices[best];
  result.value = values[best];
  return result;
}

}  // namespace unitarity::optimize
