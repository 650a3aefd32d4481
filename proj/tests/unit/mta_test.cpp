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

#include <random>

#include "forge/diagnostics.hpp"
#include "forge/errors.hpp"
#include "forge/grad_check.hpp"
#include "forge/mta.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

std::vector<Eigen::Matrix4d> random_motions(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::Matrix4d> out{Eigen::Matrix4d::Identity()};
  while (out.size() < n) {
    out.push_back(make_pose(yaw_rotation(0.2 * g(rng)), {g(rng), 0.3 * g(rng), 0.0}));
  }
  return out;
}

MotionBlock random_block(std::size_t hw, std::size_t m, std::size_t t, std::size_t c, std::mt19937_64& rng) {
  return MotionBlock{Tensor::randn({hw, m, c}, rng), Tensor::randn({hw, t, c}, rng), random_motions(m + t, rng)};
}

MtaParams trained_params(std::size_t c, std::size_t heads, std::mt19937_64& rng) {
  MtaParams p = MtaParams::random(c, heads, rng);
  p.attn_out.map = Linear::random(c, c, rng);
  p.motion_out.map = Linear::random(c, c, rng);
  return p;
}

TEST(Mta, FreshZeroConvsGiveBitExactIdentity) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const MotionBlock b = random_block(9, 2, 7, 8, rng);
    EXPECT_TRUE(mta_forward(b, MtaParams::random(8, 2, rng)).identical(b.latents));
  }
  const IdentityProbe probe = mta_identity_probe(10, 7);
  EXPECT_EQ(probe.blocks, 10u);
  EXPECT_TRUE(probe.bit_exact);
  EXPECT_EQ(probe.max_deviation, 0.0);
}

TEST(Mta, ForwardMatchesCompositionOfBlocks) {
  std::mt19937_64 rng(2);
  const std::size_t hw = 3, m = 2, t = 4, c = 6;
  const MotionBlock b = random_block(hw, m, t, c, rng);
  const MtaParams p = trained_params(c, 2, rng);

  const Tensor zmt = concat_time(linear_forward(p.adapter, b.motion), b.latents);
  const Tensor emb = ego_motion_embedding(b.poses, p.ego);
  Tensor with_ego = zmt;
  for (std::size_t l = 0; l < hw; ++l)
    for (std::size_t s = 0; s < m + t; ++s)
      for (std::size_t k = 0; k < c; ++k) with_ego.at({l, s, k}) += emb.at({s, k});
  const Tensor zbar = add(zmt, zero_conv(p.attn_out, self_attention(p.attn, with_ego)));
  const Tensor expect =
      add(slice_time(zbar, m, t), zero_conv(p.motion_out, local_motion(b.latents, p.lmm)));
  EXPECT_LT(max_abs_diff(mta_forward(b, p), expect), 1e-12);
}

TEST(LocalMotion, ReachIsThreeFramesAndExactlyZeroBeyond) {
  std::mt19937_64 rng(3);
  const LmmParams p = LmmParams::random(4, rng);
  const std::size_t t = 12, src = 5;
  const Tensor x = Tensor::randn({2, t, 4}, rng);
  Tensor y = x;
  for (std::size_t k = 0; k < 4; ++k) y.at({1, src, k}) += 0.7;
  const Tensor a = local_motion(x, p), b = local_motion(y, p);
  for (std::size_t s = 0; s < t; ++s) {
    const std::size_t dist = s > src ? s - src : src - s;
    double diff = 0.0;
    for (std::size_t k = 0; k < 4; ++k) diff = std::max(diff, std::abs(a.at({1, s, k}) - b.at({1, s, k})));
    if (dist > 3) {
      EXPECT_EQ(diff, 0.0) << "frame " << s;
    } else {
      EXPECT_GT(diff, 0.0) << "frame " << s;
    }
  }
  EXPECT_TRUE(slice_leading(a, 0, 1).identical(slice_leading(b, 0, 1)));
}

TEST(LocalMotion, SingleFrameReducesToConvBiasResponse) {
  std::mt19937_64 rng(4);
  const LmmParams p = LmmParams::random(3, rng);
  // With one frame both differences vanish and only the conv biases act.
  const Tensor x = Tensor::randn({2, 1, 3}, rng);
  const Tensor zeros({2, 1, 3});
  const Tensor gf = temporal_block_forward(p.gamma_f, zeros), gb = temporal_block_forward(p.gamma_b, zeros);
  const Tensor v = linear_forward(p.phi_v, x);
  const Tensor y = local_motion(x, p);
  for (std::size_t i = 0; i < y.size(); ++i) {
    EXPECT_NEAR(y[i], (p.gates[0] * gf[i] + p.gates[1] * gb[i]) * v[i], 1e-14);
  }
}

TEST(LocalMotion, Gradients) {
  std::mt19937_64 rng(5);
  const LmmParams p = LmmParams::random(3, rng);
  const Tensor x = Tensor::randn({2, 4, 3}, rng), w = Tensor::randn({2, 4, 3}, rng);
  LmmParams g = zeros_like(p);
  const Tensor dx = local_motion_backward(x, p, w, g);
  Tensor probe = x;
  EXPECT_LE(grad_check(
                [&](std::span<const double> v) {
                  std::copy(v.begin(), v.end(), probe.data());
                  return dot(local_motion(probe, p), w);
                },
                dx.values(), x.values(), 1e-5),
            1e-6);
  EXPECT_LE(check_param_gradient<LmmParams>(
                p, [&](const LmmParams& q) { return dot(local_motion(x, q), w); }, g, 1e-5)
                .max_rel_error,
            1e-6);
}

TEST(Mta, GradientsForInputsAndParameters) {
  std::mt19937_64 rng(6);
  const MotionBlock b = random_block(2, 2, 3, 4, rng);
  const MtaParams p = trained_params(4, 2, rng);
  const Tensor w = Tensor::randn(b.latents.dims(), rng);
  MtaParams g = zeros_like(p);
  const MtaInputGradient d = mta_backward(b, p, w, g);

  MotionBlock probe = b;
  EXPECT_LE(grad_check(
                [&](std::span<const double> v) {
                  std::copy(v.begin(), v.end(), probe.latents.data());
                  return dot(mta_forward(probe, p), w);
                },
                d.d_latents.values(), b.latents.values(), 1e-5),
            1e-6);
  probe = b;
  EXPECT_LE(grad_check(
                [&](std::span<const double> v) {
                  std::copy(v.begin(), v.end(), probe.motion.data());
                  return dot(mta_forward(probe, p), w);
                },
                d.d_motion.values(), b.motion.values(), 1e-5),
            1e-6);
  const auto r = check_param_gradient<MtaParams>(
      p, [&](const MtaParams& q) { return dot(mta_forward(b, q), w); }, g, 1e-5);
  EXPECT_LE(r.max_rel_error, 1e-6) << param_names(p)[r.worst_index];
}

TEST(EgoMotionEmbedding, RejectsNonRigidPoses) {
  std::mt19937_64 rng(7);
  const MtaParams p = MtaParams::random(4, 1, rng);
  auto poses = random_motions(3, rng);
  EXPECT_EQ(ego_motion_embedding(poses, p.ego).dims(), (Shape{3, 4}));
  poses[1].topLeftCorner<3, 3>() *= 1.1;
  EXPECT_THROW(ego_motion_embedding(poses, p.ego), Error);
  poses[1] = Eigen::Matrix4d::Identity();
  poses[1](3, 0) = 0.5;
  EXPECT_THROW(ego_motion_embedding(poses, p.ego), Error);
}

TEST(PoseFeatures, RotationRowMajorThenTranslation) {
  const Eigen::Matrix4d m = make_pose(yaw_rotation(0.3), {1, 2, 3});
  const auto f = pose_features(m);
  ASSERT_EQ(f.size(), 12u);
  EXPECT_EQ(f[1], m(0, 1));
  EXPECT_EQ(f[3], m(1, 0));
  EXPECT_EQ(f[9], 1.0);
  EXPECT_EQ(f[11], 3.0);
}

TEST(RelativePoseChain, IdentityThenConsecutiveRelatives) {
  const std::vector<EgoPose> track{testing::pose_at(0, 0, 0), testing::pose_at(1, 0, 0.1),
                                   testing::pose_at(2, 0.5, 0.3)};
  const auto chain = relative_pose_chain(track);
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain[0], Eigen::Matrix4d::Identity());
  EXPECT_LT((chain[2] - relative_pose(track[1], track[2])).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MotionBlock, ValidateChecksShapesAndPoseCount) {
  std::mt19937_64 rng(8);
  MotionBlock b = random_block(2, 2, 3, 4, rng);
  EXPECT_NO_THROW(b.validate());
  b.poses.pop_back();
  EXPECT_THROW(b.validate(), Error);
  b = random_block(2, 2, 3, 4, rng);
  b.motion = Tensor({2, 2, 5});
  EXPECT_THROW(b.validate(), ShapeError);
  b = random_block(2, 2, 3, 4, rng);
  b.motion = Tensor({3, 2, 4});
  EXPECT_THROW(mta_forward(b, MtaParams::random(4, 1, rng)), ShapeError);
}

TEST(TimeAxis, ConcatAndSlice) {
  const Tensor a({2, 1, 2}, {1, 2, 3, 4}), b({2, 2, 2}, {5, 6, 7, 8, 9, 10, 11, 12});
  const Tensor c = concat_time(a, b);
  EXPECT_EQ(c.dims(), (Shape{2, 3, 2}));
  EXPECT_TRUE(c.identical(Tensor({2, 3, 2}, {1, 2, 5, 6, 7, 8, 3, 4, 9, 10, 11, 12})));
  EXPECT_TRUE(slice_time(c, 1, 2).identical(b));
  EXPECT_TRUE(slice_time(c, 0, 1).identical(a));
  EXPECT_THROW(slice_time(c, 2, 2), ShapeError);
  EXPECT_THROW(concat_time(a, Tensor({3, 1, 2})), ShapeError);
}

}  // namespace
}  // namespace forge
