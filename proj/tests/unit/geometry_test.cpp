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
#include <random>

#include "forge/errors.hpp"
#include "forge/geometry.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

using testing::make_camera;
using testing::pose_at;

Camera axis_camera() {
  Camera c;
  c.image_height = 224;
  c.image_width = 400;
  c.intrinsics << 100, 0, 200, 0, 100, 112, 0, 0, 1;
  return c;
}

TEST(Unproject, PrincipalPointLiesOnOpticalAxis) {
  const Camera c = axis_camera();
  const Eigen::Vector3d p = unproject(c, 200.0, 112.0, 5.0);
  EXPECT_EQ(p, Eigen::Vector3d(0, 0, 5));
}

TEST(Unproject, HandComputedInverseIntrinsics) {
  const Eigen::Vector3d p = unproject(axis_camera(), 300.0, 112.0, 10.0);
  EXPECT_NEAR((p - Eigen::Vector3d(10, 0, 10)).norm(), 0.0, 1e-12);
}

TEST(Unproject, MatchesMatrixInverseWithSkew) {
  Camera c = axis_camera();
  c.intrinsics(0, 1) = 3.0;
  const Eigen::Vector3d expect = 7.0 * (c.intrinsics.inverse() * Eigen::Vector3d(123.0, 45.0, 1.0));
  EXPECT_NEAR((unproject(c, 123.0, 45.0, 7.0) - expect).norm(), 0.0, 1e-12);
}

TEST(FrustumPoints, CellCenteredAnchorsAndPositiveDepth) {
  CameraRig rig{{axis_camera()}};
  const FrustumGrid g = frustum_points(rig, 0, 50, 28, 8);
  EXPECT_EQ(g.points.dims(), (Shape{50, 28, 8, 3}));
  for (std::size_t i = 0; i < g.points.size(); i += 3) EXPECT_GT(g.points[i + 2], 0.0);
  // u index 0, v index 0 sits at pixel (4, 4) on a 400 x 224 image.
  const Eigen::Vector3d expect = unproject(rig.cameras[0], 4.0, 4.0, 1.0);
  EXPECT_EQ(g.points.at({0, 0, 0, 0}), expect.x());
  EXPECT_EQ(g.points.at({0, 0, 0, 1}), expect.y());
  EXPECT_EQ(g.points.at({0, 0, 7, 2}), 60.0);
  EXPECT_THROW(frustum_points(rig, 0, 0, 1, 1), Error);
  EXPECT_THROW(frustum_points(rig, 1, 1, 1, 1), Error);
}

TEST(DepthSamples, LinearAndLogSpacing) {
  const auto lin = depth_samples(4, {});
  EXPECT_DOUBLE_EQ(lin[0], 1.0);
  EXPECT_DOUBLE_EQ(lin[1], 1.0 + 59.0 / 3.0);
  EXPECT_DOUBLE_EQ(lin[3], 60.0);
  const auto lg = depth_samples(3, {1.0, 100.0, DepthSpacing::kLog});
  EXPECT_NEAR(lg[1], 10.0, 1e-12);
  EXPECT_THROW(depth_samples(2, {5.0, 1.0}), Error);
}

TEST(CamToWorld, IdentityTranslationAndMatrixOracle) {
  CameraRig rig{{axis_camera()}};
  FrustumGrid g = frustum_points(rig, 0, 3, 2, 2);
  EXPECT_TRUE(cam_to_world(g, rig, 0).identical(g.points));

  rig.cameras[0].translation = {1, 2, 3};
  g.points = Tensor({1, 1, 1, 3}, {0, 0, 5});
  const Tensor w = cam_to_world(g, rig, 0);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], 2.0);
  EXPECT_EQ(w[2], 8.0);

  rig.cameras[0].rotation = yaw_rotation(M_PI / 2);
  std::mt19937_64 rng(4);
  g.points = Tensor::randn({2, 2, 2, 3}, rng);
  const Tensor rotated = cam_to_world(g, rig, 0);
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  m.topRightCorner<3, 1>() << 1, 2, 3;
  for (std::size_t i = 0; i < 8; ++i) {
    const Eigen::Vector4d h = m * Eigen::Vector4d(g.points[3 * i], g.points[3 * i + 1], g.points[3 * i + 2], 1);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(rotated[3 * i + a], h[a], 1e-12);
  }
  const Tensor back = world_to_cam(rotated, rig, 0);
  EXPECT_LT(max_abs_diff(back, g.points), 1e-10);
}

TEST(NormalizeRoi, CornersMidpointAndClamping) {
  const Roi roi;
  const Tensor pts({3, 3}, {-50, -50, -5, 0, 0, -1, 80, -60, 0});
  const NormalizedPoints n = normalize_roi(pts, roi);
  EXPECT_EQ(n.points[0], 0.0);
  EXPECT_EQ(n.points[2], 0.0);
  EXPECT_EQ(n.points[3], 0.5);
  EXPECT_EQ(n.points[5], 0.5);
  EXPECT_EQ(n.in_roi, (std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(n.points[6], 1.0);
  EXPECT_EQ(n.points[7], 0.0);
  EXPECT_EQ(n.points[8], 5.0 / 8.0);
  EXPECT_THROW(normalize_roi(Tensor({2, 2}), roi), ShapeError);
}

TEST(NormalizeRoi, StrictlyMonotoneInsideRoi) {
  const Roi roi;
  double prev = -1.0;
  for (double x = -49.0; x < 50.0; x += 7.3) {
    const double v = normalize_roi(Tensor({1, 3}, {x, 0, 0}), roi).points[0];
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(BoxVertices, UnitCubeBitOrder) {
  const Box3D unit;
  const auto v = box_vertices(unit);
  for (int k = 0; k < 8; ++k) {
    const Eigen::Vector3d expect((k & 4) ? 0.5 : -0.5, (k & 2) ? 0.5 : -0.5, (k & 1) ? 0.5 : -0.5);
    EXPECT_EQ(v[k], expect) << k;
  }
}

TEST(BoxVertices, HomogeneousMatrixOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Box3D b = testing::random_box(rng, 3);
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = Eigen::AngleAxisd(b.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    m.topRightCorner<3, 1>() = b.center;
    const auto v = box_vertices(b);
    for (int k = 0; k < 8; ++k) {
      const Eigen::Vector4d local((k & 4 ? 0.5 : -0.5) * b.size.x(), (k & 2 ? 0.5 : -0.5) * b.size.y(),
                                  (k & 1 ? 0.5 : -0.5) * b.size.z(), 1.0);
      EXPECT_LT(((m * local).head<3>() - v[k]).norm(), 1e-12);
    }
  }
}

TEST(BoxVertices, QuarterTurnSwapsLengthAndWidth) {
  Box3D b;
  b.size = {4, 2, 1};
  b.yaw = M_PI / 2;
  const auto v = box_vertices(b);
  double xmax = 0, ymax = 0;
  for (const auto& p : v) {
    xmax = std::max(xmax, p.x());
    ymax = std::max(ymax, p.y());
  }
  EXPECT_NEAR(xmax, 1.0, 1e-12);
  EXPECT_NEAR(ymax, 2.0, 1e-12);
}

TEST(PointInBox, CenterFacesAndOutside) {
  Box3D b;
  b.center = {1, 2, 3};
  b.size = {4, 2, 2};
  EXPECT_TRUE(point_in_box(b.center, b));
  EXPECT_TRUE(point_in_box({3, 2, 3}, b));
  EXPECT_TRUE(point_in_box({1, 3, 4}, b));
  EXPECT_FALSE(point_in_box({3.0001, 2, 3}, b));
}

TEST(PointInBox, HalfSpaceOracleOnRandomPoints) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-25.0, 25.0);
  const Box3D b = testing::random_box(rng, 1, 5.0);
  const auto v = box_vertices(b);
  // Box edges from vertex 0 along the length, width and height axes.
  const Eigen::Vector3d ex = (v[4] - v[0]).normalized(), ey = (v[2] - v[0]).normalized(), ez = (v[1] - v[0]).normalized();
  std::size_t inside = 0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p(b.center.x() + 0.2 * u(rng), b.center.y() + 0.2 * u(rng), b.center.z() + 0.1 * u(rng));
    bool oracle = true;
    for (const auto& [axis, lo, hi] : {std::tuple{ex, v[0], v[4]}, std::tuple{ey, v[0], v[2]}, std::tuple{ez, v[0], v[1]}}) {
      const double s = (p - lo).dot(axis);
      if (s < -1e-12 || s > (hi - lo).dot(axis) + 1e-12) oracle = false;
    }
    EXPECT_EQ(point_in_box(p, b), oracle) << i;
    inside += oracle;
  }
  EXPECT_GT(inside, 0u);
  EXPECT_LT(inside, 1000u);
}

TEST(PointInBox, InvariantUnderJointYawRotation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  Box3D b;
  b.size = {4, 2, 2};
  b.yaw = 0.3;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d p(u(rng), u(rng), 0.5 * u(rng));
    Box3D r = b;
    r.yaw = b.yaw + 1.1;
    const Eigen::Vector3d q = yaw_rotation(1.1) * p;
    EXPECT_EQ(point_in_box(p, b), point_in_box(q, r));
  }
}

TEST(RelativePose, IdentityTranslationAndComposition) {
  const EgoPose a = pose_at(3, 4, 0.5);
  EXPECT_LT((relative_pose(a, a) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);

  const Eigen::Matrix4d fwd = relative_pose(pose_at(0, 0, 0), pose_at(2, 0, 0));
  EXPECT_LT((fwd.topLeftCorner<3, 3>() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ((fwd.topRightCorner<3, 1>()), (Eigen::Vector3d(2, 0, 0)));

  const EgoPose b = pose_at(-1, 7, 2.0), c = pose_at(5, 5, -2.5);
  EXPECT_LT((a.world_from_ego * relative_pose(a, b) - b.world_from_ego).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((relative_pose(a, b) * relative_pose(b, c) - relative_pose(a, c)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rigid, InverseAndValidation) {
  const Eigen::Matrix4d m = make_pose(yaw_rotation(0.7), {1, 2, 3});
  EXPECT_LT((rigid_inverse(m) * m - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(is_rigid(m));
  Eigen::Matrix4d s = m;
  s(0, 0) *= 2.0;
  EXPECT_FALSE(is_rigid(s));
}

TEST(Camera, ValidateRejectsBadIntrinsicsAndRotation) {
  Camera c = make_camera(0.0, 0.0, {0, 0, 1});
  EXPECT_NO_THROW(c.validate());
  Camera neg = c;
  neg.intrinsics(0, 0) = -1.0;
  EXPECT_THROW(neg.validate(), Error);
  Camera bad = c;
  bad.rotation(0, 0) += 0.1;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(-M_PI), M_PI);
  EXPECT_NEAR(wrap_angle(3 * M_PI / 2), -M_PI / 2, 1e-12);
  EXPECT_DOUBLE_EQ(wrap_angle(0.25), 0.25);
}

TEST(BoxToEgo, InverseOfEgoPose) {
  Box3D b;
  b.center = {10, 5, 1};
  b.yaw = 0.2;
  const Box3D e = box_to_ego(b, pose_at(10, 0, M_PI / 2));
  EXPECT_NEAR(e.center.x(), 5.0, 1e-12);
  EXPECT_NEAR(e.center.y(), 0.0, 1e-12);
  EXPECT_NEAR(e.yaw, 0.2 - M_PI / 2, 1e-12);
}

}  // namespace
}  // namespace forge
