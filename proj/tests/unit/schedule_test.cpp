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
#include <numbers>
#include <random>

#include "forge/errors.hpp"
#include "forge/schedule.hpp"

namespace forge {
namespace {

TEST(Schedule, CosineClosedForm) {
  const auto s = make_schedule(11);
  const double lo = 0.01, hi = std::numbers::pi / 2 - 0.01;
  for (std::size_t t = 0; t < 11; ++t) {
    const double c = std::cos(lo + (hi - lo) * t / 10.0);
    EXPECT_NEAR(s.at(t), c * c, 1e-15) << t;
  }
  EXPECT_NEAR(s.at(0), std::pow(std::cos(0.01), 2), 1e-15);
  EXPECT_NEAR(s.at(10), std::pow(std::sin(0.01), 2), 1e-15);
  EXPECT_THROW(s.at(11), Error);
}

TEST(Schedule, LinearEndpointsAndMonotone) {
  const auto s = make_schedule(5, ScheduleKind::kLinear);
  EXPECT_DOUBLE_EQ(s.at(0), 0.9999);
  EXPECT_NEAR(s.at(4), 1e-4, 1e-16);
  EXPECT_NEAR(s.at(2), 0.5 * (0.9999 + 1e-4), 1e-15);
  for (std::size_t t = 1; t < 5; ++t) EXPECT_LT(s.at(t), s.at(t - 1));
  EXPECT_THROW(make_schedule(1), Error);
  EXPECT_EQ(parse_schedule_kind("linear"), ScheduleKind::kLinear);
  EXPECT_THROW(parse_schedule_kind("sigmoid"), Error);
}

TEST(AddNoise, ElementwiseFormula) {
  const Tensor z({3}, {1.0, -2.0, 0.5}), e({3}, {0.3, 0.1, -1.0});
  const Tensor n = add_noise_at(z, 0.64, e);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(n[i], 0.8 * z[i] + 0.6 * e[i], 1e-15);
  EXPECT_TRUE(add_noise_at(z, 1.0, e).identical(z));
  EXPECT_TRUE(add_noise_at(z, 0.0, e).identical(e));
  EXPECT_THROW(add_noise_at(z, 1.5, e), Error);
  EXPECT_THROW(add_noise_at(z, 0.5, Tensor({2})), ShapeError);
}

TEST(CfgCombine, ScaleOneIsConditionalAndZeroIsUnconditional) {
  const Tensor u({2}, {1.0, 2.0}), c({2}, {3.0, -1.0});
  EXPECT_TRUE(cfg_combine(u, c, 1.0).identical(c));
  EXPECT_TRUE(cfg_combine(u, c, 0.0).identical(u));
  const Tensor g = cfg_combine(u, c, 2.5);
  EXPECT_DOUBLE_EQ(g[0], 1.0 + 2.5 * 2.0);
  EXPECT_DOUBLE_EQ(g[1], 2.0 + 2.5 * -3.0);
  EXPECT_THROW(cfg_combine(u, Tensor({3}), 1.0), ShapeError);
}

TEST(OverlapBlend, ReplacesLeadingFramesOnly) {
  std::mt19937_64 rng(1);
  const auto sched = make_schedule(10);
  const Tensor z = Tensor::randn({5, 2, 3}, rng);
  const Tensor prev = Tensor::randn({2, 2, 3}, rng);
  const Tensor eps = Tensor::randn({2, 2, 3}, rng);
  const Tensor out = overlap_blend(z, prev, 2, 6, eps, sched);
  const Tensor head = add_noise(prev, 6, eps, sched);
  EXPECT_TRUE(slice_leading(out, 0, 2).identical(head));
  EXPECT_TRUE(slice_leading(out, 2, 3).identical(slice_leading(z, 2, 3)));
  EXPECT_TRUE(overlap_blend(z, Tensor(), 0, 6, Tensor(), sched).identical(z));
  EXPECT_THROW(overlap_blend(z, prev, 5, 6, eps, sched), Error);
  EXPECT_THROW(overlap_blend(z, Tensor::randn({3, 2, 3}, rng), 2, 6, eps, sched), ShapeError);
}

TEST(OverlapBlend, SampleMomentsMatchForwardProcess) {
  std::mt19937_64 rng(2);
  const auto sched = make_schedule(20);
  const Tensor prev({1, 2}, {0.7, -1.3});
  const Tensor z({3, 2});
  const std::size_t draws = 4000, t = 12;
  std::vector<double> sum(2, 0.0), sq(2, 0.0);
  for (std::size_t n = 0; n < draws; ++n) {
    const Tensor out = overlap_blend(z, prev, 1, t, Tensor::randn({1, 2}, rng), sched);
    for (std::size_t k = 0; k < 2; ++k) {
      sum[k] += out[k];
      sq[k] += out[k] * out[k];
    }
  }
  const double ab = sched.at(t);
  for (std::size_t k = 0; k < 2; ++k) {
    const double mean = sum[k] / draws;
    const double var = sq[k] / draws - mean * mean;
    const double se_mean = std::sqrt((1.0 - ab) / draws);
    const double se_var = (1.0 - ab) * std::sqrt(2.0 / (draws - 1));
    EXPECT_LT(std::abs(mean - std::sqrt(ab) * prev[k]), 3.0 * se_mean);
    EXPECT_LT(std::abs(var - (1.0 - ab)), 3.0 * se_var);
  }
}

TEST(SamplerTimesteps, EvenlySpreadDescendingToZero) {
  const auto s = make_schedule(1000);
  EXPECT_EQ(sampler_timesteps(s, 4), (std::vector<std::size_t>{999, 666, 333, 0}));
  EXPECT_EQ(sampler_timesteps(s, 2), (std::vector<std::size_t>{999, 0}));
  EXPECT_EQ(sampler_timesteps(s, 1), (std::vector<std::size_t>{999}));
  EXPECT_EQ(sampler_timesteps(make_schedule(4), 4), (std::vector<std::size_t>{3, 2, 1, 0}));
  EXPECT_THROW(sampler_timesteps(make_schedule(4), 5), Error);
  EXPECT_THROW(sampler_timesteps(s, 0), Error);
}

}  // namespace
}  // namespace forge
