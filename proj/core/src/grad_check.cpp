// Copyright 2026 The Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "forge/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "forge/errors.hpp"

namespace forge {

GradCheckReport grad_check_report(const ScalarFunction& f, std::span<const double> analytic,
                                  std::span<const double> x0, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw Error("grad_check: eps must lie in [1e-7, 1e-3]");
  if (analytic.size() != x0.size()) {
    throw ShapeError("grad_check: gradient length " + std::to_string(analytic.size()) +
                     " != parameter length " + std::to_string(x0.size()));
  }
  std::vector<double> x(x0.begin(), x0.end());
  auto eval = [&]() {
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericError("grad_check: function returned a non-finite value");
    return v;
  };
  eval();

  GradCheckReport report;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = eval();
    x[i] = saved - eps;
    const double down = eval();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    if (err > report.max_rel_error || i == 0) {
      report.max_rel_error = std::max(report.max_rel_error, err);
      report.worst_index = i;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
  }
  return report;
}

double grad_check(const ScalarFunction& f, std::span<const double> analytic,
                  std::span<const double> x0, double eps) {
  return grad_check_report(f, analytic, x0, eps).max_rel_error;
}

}  // namespace forge
