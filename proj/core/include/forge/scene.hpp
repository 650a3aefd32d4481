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

// Scene documents, run configuration and on-demand scene streams.
//
// A scene holds a camera rig (extrinsics relative to the ego vehicle), boxes
// and a BEV road layout in the world frame, an ego pose track sampled at the
// video frame rate, a prompt and optional configuration overrides.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forge/canvas.hpp"
#include "forge/geometry.hpp"
#include "forge/schedule.hpp"

namespace forge {

struct RunConfig {
  std::size_t clip_length = 7;    // T
  std::size_t motion_frames = 2;  // M
  std::size_t overlap = 2;        // N
  std::size_t steps = 20;
  double cfg_scale = 2.0;
  std::size_t image_height = 224;
  std::size_t image_width = 400;
  double fps = 12.0;
  std::uint64_t seed = 0;
  std::size_t schedule_length = 1000;
  ScheduleKind schedule = ScheduleKind::kCosine;

  void validate() const;
  /// Latent grid at an 8x spatial stride.
  std::size_t latent_height() const { return image_height / 8; }
  std::size_t latent_width() const { return image_width / 8; }
};

struct ConfigOverrides {
  std::optional<std::size_t> clip_length, motion_frames, overlap, steps;
  std::optional<double> cfg_scale;
  std::optional<std::size_t> image_height, image_width;
  std::optional<double> fps;
  std::optional<std::uint64_t> seed;

  void apply_to(RunConfig& cfg) const;
  bool operator==(const ConfigOverrides&) const = default;
};

/// Built-in defaults, then scene-file overrides, then command-line overrides.
RunConfig resolve_config(const ConfigOverrides& scene, const ConfigOverrides& cli);

struct Scene {
  CameraRig rig;  // camera -> ego extrinsics
  std::vector<std::string> box_classes;
  std::vector<Box3D> boxes;  // world frame
  std::vector<std::string> road_classes;
  BevLayout layout;  // world frame
  std::vector<EgoPose> ego_track;
  std::string prompt;
  ConfigOverrides overrides;

  void validate() const;
};

/// Bitwise comparison of every field.
bool identical(const Scene& a, const Scene& b);

/// nuScenes-style box categories used when a scene omits `box_classes`.
const std::vector<std::string>& default_box_classes();
const std::vector<std::string>& default_road_classes();

/// Throws SchemaError naming the offending field, e.g. `boxes[0].size`.
Scene parse_scene(const std::string& text);
Scene load_scene(const std::filesystem::path& path);
std::string scene_to_string(const Scene& scene);
void save_scene(const std::filesystem::path& path, const Scene& scene);

struct SceneFrame {
  std::size_t index = 0;
  EgoPose ego;
  std::vector<Box3D> boxes;  // world frame
};

class SceneStream {
 public:
  virtual ~SceneStream() = default;
  /// nullopt once the stream is exhausted.
  virtual std::optional<SceneFrame> frame(std::size_t index) = 0;
};

/// Static world boxes seen from the scene's ego track. Beyond the recorded
/// track the last relative motion is repeated (constant velocity and yaw
/// rate); `limit`, when set, ends the stream after that many frames.
class TrackSceneStream : public SceneStream {
 public:
  TrackSceneStream(const Scene& scene, double fps, std::optional<std::size_t> limit = {});
  std::optional<SceneFrame> frame(std::size_t index) override;

 private:
  const Scene& scene_;
  double fps_;
  std::optional<std::size_t> limit_;
};

/// Ego pose at frame `index` of a track, extrapolated as described above.
EgoPose track_pose(const std::vector<EgoPose>& track, std::size_t index, double fps);

}  // namespace forge
