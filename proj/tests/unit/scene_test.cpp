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

#include <filesystem>

#include "forge/errors.hpp"
#include "forge/scene.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

using testing::data_path;

const char* kMinimal = R"({"cameras": [{"name": "c", "intrinsics": [[10, 0, 4], [0, 10, 4], [0, 0, 1]],
  "rotation": [[0, 0, 1], [-1, 0, 0], [0, -1, 0]], "translation": [0, 0, 1.5], "image_size": [8, 8]}]})";

std::string with(const std::string& extra) {
  std::string s = kMinimal;
  s.insert(s.size() - 1, ", " + extra);
  return s;
}

std::string field_of(const std::string& text) {
  try {
    parse_scene(text);
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "<accepted>";
}

TEST(Scene, MinimalFixtureLoads) {
  const Scene s = load_scene(data_path("scenes/minimal.json"));
  ASSERT_EQ(s.rig.size(), 1u);
  EXPECT_EQ(s.rig.cameras[0].name, "CAM_FRONT");
  EXPECT_EQ(s.rig.cameras[0].image_width, 64);
  EXPECT_TRUE(s.boxes.empty());
  EXPECT_EQ(s.overrides.image_height, 32u);
  EXPECT_EQ(s.box_classes, default_box_classes());
  EXPECT_NO_THROW(s.validate());
}

TEST(Scene, SixCameraFixtureRoundTripsBitExactly) {
  const Scene a = load_scene(data_path("scenes/nuscenes_rig.json"));
  EXPECT_EQ(a.rig.size(), 6u);
  EXPECT_EQ(a.boxes.size(), 8u);
  EXPECT_EQ(a.layout.rows, 200u);
  EXPECT_EQ(a.ego_track.size(), 12u);
  const Scene b = parse_scene(scene_to_string(a));
  EXPECT_TRUE(identical(a, b));

  const auto path = std::filesystem::temp_directory_path() / "forge_scene_roundtrip.json";
  save_scene(path, a);
  EXPECT_TRUE(identical(a, load_scene(path)));
  std::filesystem::remove(path);
}

TEST(Scene, IdenticalDetectsSingleBitChanges) {
  const Scene a = parse_scene(kMinimal);
  Scene b = a;
  EXPECT_TRUE(identical(a, b));
  b.rig.cameras[0].translation.z() = std::nextafter(1.5, 2.0);
  EXPECT_FALSE(identical(a, b));
}

TEST(Scene, SchemaErrorsNameTheField) {
  EXPECT_EQ(field_of(with(R"("boxes": [{"center": [1, 2, 0], "size": [4, -2, 1.5], "yaw": 0, "class": "car"}])")),
            "boxes[0].size");
  EXPECT_EQ(field_of(with(R"("boxes": [{"center": [1, 2, 0], "size": [4, 2, 1.5], "yaw": 0, "class": "ufo"}])")),
            "boxes[0].class");
  EXPECT_EQ(field_of(with(R"("boxes": [{"center": [1, 2], "size": [4, 2, 1.5], "yaw": 0, "class": 0}])")),
            "boxes[0].center");
  EXPECT_EQ(field_of(with(R"("colour": "red")")), "colour");
  EXPECT_EQ(field_of(with(R"("config": {"steps": -1})")), "config.steps");
  EXPECT_EQ(field_of(with(R"("config": {"temperature": 1})")), "config.temperature");
  EXPECT_EQ(field_of(with(R"("ego_track": [{"timestamp": 0, "translation": [0, 0, 0]}])")), "ego_track[0]");
  EXPECT_EQ(field_of(R"({"cameras": []})"), "cameras");
  EXPECT_EQ(field_of("{not json"), "<document>");
  EXPECT_EQ(field_of(kMinimal), "<accepted>");
}

TEST(Scene, CameraFieldChecks) {
  std::string bad_rot = kMinimal;
  bad_rot.replace(bad_rot.find("[[0, 0, 1]"), 10, "[[0, 0, 2]");
  EXPECT_EQ(field_of(bad_rot), "cameras[0].rotation");
  std::string bad_size = kMinimal;
  bad_size.replace(bad_size.find("[8, 8]"), 6, "[0, 8]");
  EXPECT_EQ(field_of(bad_size), "cameras[0].image_size");
}

TEST(Scene, LayoutRunLengthDecoding) {
  const Scene s = parse_scene(with(R"("layout": {"rows": 2, "cols": 3, "resolution": 0.5, "origin": [-1, -1],
      "classes": ["road", "lane"], "rle": [[0, 2], [3, 1], [1, 3]]})"));
  EXPECT_EQ(s.layout.cells, (std::vector<std::uint32_t>{0, 0, 3, 1, 1, 1}));
  EXPECT_EQ(s.road_classes.size(), 2u);
  EXPECT_EQ(field_of(with(R"("layout": {"rows": 2, "cols": 3, "resolution": 0.5, "origin": [0, 0],
      "classes": ["road"], "rle": [[0, 5]]})")),
            "layout.rle");
  EXPECT_EQ(field_of(with(R"("layout": {"rows": 1, "cols": 1, "resolution": 0.5, "origin": [0, 0],
      "classes": ["road"], "rle": [[2, 1]]})")),
            "layout.rle[0]");
}

TEST(RunConfig, PrecedenceDefaultsThenSceneThenCli) {
  ConfigOverrides scene, cli;
  scene.steps = 10;
  scene.overlap = 3;
  scene.seed = 5;
  cli.steps = 4;
  const RunConfig c = resolve_config(scene, cli);
  EXPECT_EQ(c.steps, 4u);
  EXPECT_EQ(c.overlap, 3u);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.clip_length, 7u);
  EXPECT_EQ(c.motion_frames, 2u);
  cli.overlap = 7;
  EXPECT_THROW(resolve_config(scene, cli), Error);
}

TEST(RunConfig, ValidateRejectsBadValues) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.latent_height(), 28u);
  EXPECT_EQ(c.latent_width(), 50u);
  c.fps = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = RunConfig{};
  c.image_width = 4;
  EXPECT_THROW(c.validate(), Error);
  c = RunConfig{};
  c.steps = 2000;
  EXPECT_THROW(c.validate(), Error);
}

TEST(TrackPose, ExtrapolatesLastRelativeMotion) {
  const std::vector<EgoPose> track{testing::pose_at(0, 0, 0, 0.0), testing::pose_at(1, 0, 0.1, 0.5)};
  EXPECT_EQ(track_pose(track, 1, 2.0).world_from_ego, track[1].world_from_ego);
  const EgoPose p = track_pose(track, 3, 2.0);
  const Eigen::Matrix4d step = relative_pose(track[0], track[1]);
  EXPECT_LT((p.world_from_ego - track[1].world_from_ego * step * step).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(p.timestamp, 1.5);
  EXPECT_EQ(track_pose({}, 4, 2.0).world_from_ego, Eigen::Matrix4d::Identity());
}

TEST(TrackSceneStream, LimitEndsTheStream) {
  const Scene s = load_scene(data_path("scenes/nuscenes_rig.json"));
  TrackSceneStream stream(s, 12.0, 20);
  const auto f = stream.frame(19);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->index, 19u);
  EXPECT_EQ(f->boxes.size(), s.boxes.size());
  EXPECT_FALSE(stream.frame(20).has_value());
  EXPECT_THROW(TrackSceneStream(s, 0.0), Error);
}

}  // namespace
}  // namespace forge
