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

#include "forge/conditions.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

bool rows_all_equal(const Tensor& t) {
  const std::size_t c = t.dim(t.rank() - 1);
  for (std::size_t i = c; i < t.size(); ++i) {
    if (t[i] != t[i % c]) return false;
  }
  return true;
}

TEST(WorldRig, ComposesEgoPoseWithExtrinsics) {
  std::mt19937_64 rng(1);
  CameraRig rig{{testing::random_camera(rng)}};
  const EgoPose pose = testing::pose_at(4, -2, 0.7);
  const CameraRig w = world_rig(rig, pose);
  const Eigen::Vector3d p_cam(0.3, -0.2, 5.0);
  const Eigen::Vector4d h = pose.world_from_ego * rig.cameras[0].to_world(p_cam).homogeneous();
  EXPECT_LT((w.cameras[0].to_world(p_cam) - h.head<3>()).norm(), 1e-12);
  EXPECT_EQ(w.cameras[0].intrinsics, rig.cameras[0].intrinsics);
}

TEST(LayoutGrid, OneHotPerBit) {
  BevLayout l = BevLayout::empty(2, 2, 1.0, {0, 0}, 3);
  l.cells = {0b101, 0, 0b010, 0b111};
  const Tensor g = layout_grid(l);
  EXPECT_EQ(g.dims(), (Shape{3, 2, 2}));
  EXPECT_TRUE(g.identical(Tensor({3, 2, 2}, {1, 0, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1})));
}

class ConditionBuilderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scene = load_scene(testing::data_path("scenes/minimal.json"));
    cfg = resolve_config(scene.overrides, {});
  }
  Scene scene;
  RunConfig cfg;
};

TEST_F(ConditionBuilderTest, ShapesFollowLatentGrid) {
  const ConditionBuilder b(scene, cfg, 3);
  EXPECT_EQ(b.latent_height(), 4u);
  EXPECT_EQ(b.latent_width(), 8u);
  const FrameConditions fc = b.build(SceneFrame{0, EgoPose{}, {}});
  const std::size_t channels = scene.road_classes.size() + scene.box_classes.size();
  EXPECT_EQ(fc.canvas.dims(), (Shape{1, channels, 16, 32}));
  EXPECT_EQ(fc.canvas_features.dims(), (Shape{1, 4, 4, 8}));
  EXPECT_EQ(fc.ope.dims(), (Shape{1, 32, 64}));
  EXPECT_TRUE(fc.embeddings.box.empty());
  EXPECT_EQ(fc.embeddings.tokens().dim(0), 2u);  // empty prompt row + one camera
  EXPECT_TRUE(rows_all_equal(fc.ope));
}

TEST_F(ConditionBuilderTest, BoxInViewChangesCanvasOpeAndTokens) {
  Box3D car;
  car.center = {12, 0, 1};
  car.size = {4, 2, 1.6};
  car.class_id = 0;
  scene.boxes = {car};
  const ConditionBuilder b(scene, cfg, 3);
  const FrameConditions fc = b.build(SceneFrame{0, EgoPose{}, scene.boxes});
  EXPECT_EQ(fc.embeddings.box.dims(), (Shape{1, 64}));
  EXPECT_FALSE(rows_all_equal(fc.ope));
  const CanvasSize size{16, 32};
  const Tensor expect = perspective_canvas(scene.layout, scene.boxes, scene.rig, size, scene.box_classes.size());
  EXPECT_TRUE(fc.canvas.identical(expect));

  // Driving past the box moves it out of the front camera.
  const FrameConditions later = b.build(SceneFrame{1, testing::pose_at(20, 0, 0), scene.boxes});
  EXPECT_FALSE(later.canvas.identical(fc.canvas));
  EXPECT_TRUE(rows_all_equal(later.ope));
}

TEST_F(ConditionBuilderTest, SeedDeterminesEncoders) {
  const ConditionBuilder a(scene, cfg, 5), b(scene, cfg, 5), c(scene, cfg, 6);
  const SceneFrame f{0, EgoPose{}, {}};
  EXPECT_TRUE(a.build(f).ope.identical(b.build(f).ope));
  EXPECT_FALSE(a.build(f).ope.identical(c.build(f).ope));
}

}  // namespace
}  // namespace forge
