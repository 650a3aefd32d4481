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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "forge/nn.hpp"

namespace forge {

using ScalarFunction = std::function<double(std::span<const double>)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares `analytic` against central differences of `f` around `x0`:
/// max_i |analytic_i - (f(x0 + eps e_i) - f(x0 - eps e_i)) / 2 eps| / max(1, |analytic_i|).
/// eps must lie in [1e-7, 1e-3]; a non-finite f value throws NumericError.
GradCheckReport grad_check_report(const ScalarFunction& f, std::span<const double> analytic,
                                  std::span<const double> x0, double eps);

double grad_check(const ScalarFunction& f, std::span<const double> analytic,
                  std::span<const double> x0, double eps);

/// Convenience for parameter bundles: `loss(params)` is evaluated with every
/// flattened coordinate perturbed in turn; `analytic` is the gradient bundle.
template <class P>
GradCheckReport check_param_gradient(const P& params, const std::function<double(const P&)>& loss,
                                     const P& analytic, double eps) {
  const std::vector<double> x0 = flatten_params(params);
  const std::vector<double> g = flatten_params(analytic);
  P probe = params;
  return grad_check_report(
      [&](std::span<const double> x) {
        assign_params(probe, x);
        return loss(probe);
      },
      g, x0, eps);
}

}  // namespace forge
