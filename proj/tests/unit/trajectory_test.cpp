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
#include <limits>
#include <numbers>
#include <random>

#include "forge/errors.hpp"
#include "forge/sim/trajectory.hpp"

namespace forge::sim {
namespace {

TrajectoryMsg plan_of(std::vector<Pose2> pts) { return TrajectoryMsg{0, 0.0, std::move(pts)}; }

TEST(WrapHeading, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_heading(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_heading(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_heading(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(wrap_heading(0.25 + 4 * std::numbers::pi), 0.25, 1e-14);
}

TEST(Interpolate, StationaryPlanStaysPut) {
  const Pose2 here{3, -1, 0.4};
  const auto dense = interpolate_trajectory(plan_of(std::vector<Pose2>(6, here)), here);
  ASSERT_EQ(dense.size(), kDensePoints);
  for (const auto& p : dense) EXPECT_EQ(p, here);
}

TEST(Interpolate, ConstantSpeedIsUniform) {
  std::vector<Pose2> pts;
  for (int k = 1; k <= 6; ++k) pts.push_back({5.0 * 0.5 * k, 0, 0});
  const auto dense = interpolate_trajectory(plan_of(pts), {0, 0, 0});
  for (std::size_t j = 0; j < dense.size(); ++j) {
    EXPECT_NEAR(dense[j].x, 5.0 * 0.1 * j, 1e-12) << j;
    EXPECT_EQ(dense[j].y, 0.0);
  }
}

TEST(Interpolate, MatchesSegmentLerpOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10), h(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Pose2> knots{{u(rng), u(rng), h(rng)}};
    for (int k = 0; k < 6; ++k) knots.push_back({u(rng), u(rng), h(rng)});
    const auto dense = interpolate_trajectory(plan_of({knots.begin() + 1, knots.end()}), knots[0]);
    for (std::size_t j = 0; j < 31; ++j) {
      const double t = 0.1 * static_cast<double>(j);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::floor(t / 0.5 + 1e-9)), 5);
      const double s = t / 0.5 - static_cast<double>(k);
      const Pose2& a = knots[k];
      const Pose2& b = knots[k + 1];
      EXPECT_NEAR(dense[j].x, a.x + s * (b.x - a.x), 1e-12);
      EXPECT_NEAR(dense[j].y, a.y + s * (b.y - a.y), 1e-12);
      // Shortest arc: the interpolated heading never leaves the short way round.
      double d = std::remainder(b.heading - a.heading, 2 * std::numbers::pi);
      const double expect = std::remainder(a.heading + s * d, 2 * std::numbers::pi);
      EXPECT_NEAR(std::remainder(dense[j].heading - expect, 2 * std::numbers::pi), 0.0, 1e-12);
      EXPECT_GT(dense[j].heading, -std::numbers::pi);
      EXPECT_LE(dense[j].heading, std::numbers::pi);
    }
    EXPECT_NEAR(dense.back().x, knots[6].x, 1e-14);
  }
}

TEST(Interpolate, HeadingCrossesPiTheShortWay) {
  std::vector<Pose2> pts(6, Pose2{0, 0, -3.0});
  const auto dense = interpolate_trajectory(plan_of(pts), {0, 0, 3.0});
  // Midway through the first segment the heading passes through pi, not 0.
  EXPECT_GT(std::abs(dense[2].heading), 3.0);
}

TEST(Interpolate, RejectsBadPlans) {
  EXPECT_THROW(interpolate_trajectory(plan_of(std::vector<Pose2>(5)), {}), Error);
  std::vector<Pose2> pts(6);
  pts[3].y = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(interpolate_trajectory(plan_of(pts), {}), NumericError);
  EXPECT_THROW(interpolate_trajectory(plan_of(std::vector<Pose2>(6)), {std::numeric_limits<double>::infinity(), 0, 0}),
               NumericError);
}

}  // namespace
}  // namespace forge::sim
