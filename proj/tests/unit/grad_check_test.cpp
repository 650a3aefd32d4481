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

#include <gtest/gtest.h>

#include <cmath>

#include "forge/errors.hpp"
#include "forge/grad_check.hpp"

namespace forge {
namespace {

double cubic(std::span<const double> x) { return x[0] * x[0] * x[0] + 2.0 * x[0] * x[1] + std::sin(x[1]); }

TEST(GradCheck, ExactGradientPasses) {
  const std::vector<double> x{0.7, -1.3};
  const std::vector<double> g{3 * 0.49 + 2 * -1.3, 2 * 0.7 + std::cos(-1.3)};
  EXPECT_LE(grad_check(cubic, g, x, 1e-5), 1e-9);
}

TEST(GradCheck, WrongGradientIsReportedAtItsIndex) {
  const std::vector<double> x{0.7, -1.3};
  const std::vector<double> g{3 * 0.49 + 2 * -1.3, 0.0};
  const auto r = grad_check_report(cubic, g, x, 1e-5);
  EXPECT_EQ(r.worst_index, 1u);
  EXPECT_NEAR(r.worst_numeric, 2 * 0.7 + std::cos(-1.3), 1e-8);
  EXPECT_GT(r.max_rel_error, 0.5);
}

TEST(GradCheck, ValidatesArguments) {
  const std::vector<double> x{1.0};
  EXPECT_THROW(grad_check(cubic, std::vector<double>{1.0, 2.0}, x, 1e-5), ShapeError);
  EXPECT_THROW(grad_check(cubic, x, x, 0.5), Error);
  EXPECT_THROW(grad_check([](std::span<const double>) { return NAN; }, x, x, 1e-5), NumericError);
}

}  // namespace
}  // namespace forge
