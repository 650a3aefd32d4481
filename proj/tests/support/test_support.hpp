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

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "forge/geometry.hpp"
#include "forge/tensor.hpp"

namespace forge::testing {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(FORGE_DATA_DIR) / rel;
}

/// Camera looking along ego +x (x right, y down, z forward).
inline Eigen::Matrix3d forward_camera_rotation() {
  return (Eigen::Matrix3d() << 0, 0, 1, -1, 0, 0, 0, -1, 0).finished();
}

inline Camera make_camera(double yaw, double pitch, const Eigen::Vector3d& t, int h = 32, int w = 48,
                          double focal = 30.0) {
  Camera cam;
  cam.name = "cam";
  cam.image_height = h;
  cam.image_width = w;
  cam.intrinsics << focal, 0.0, w / 2.0, 0.0, focal, h / 2.0, 0.0, 0.0, 1.0;
  cam.rotation = yaw_rotation(yaw) * forward_camera_rotation() *
                 Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()).toRotationMatrix();
  cam.translation = t;
  return cam;
}

/// Camera with random yaw, a slight downward pitch, a height of 1.2-2 m and
/// random focal lengths and principal point.
inline Camera random_camera(std::mt19937_64& rng, int h = 32, int w = 48) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Camera cam = make_camera(2.0 * M_PI * u(rng) - M_PI, -0.05 - 0.25 * u(rng),
                           {2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0, 1.2 + 0.8 * u(rng)}, h, w);
  cam.intrinsics(0, 0) = 20.0 + 20.0 * u(rng);
  cam.intrinsics(1, 1) = 20.0 + 20.0 * u(rng);
  cam.intrinsics(0, 2) = w * (0.4 + 0.2 * u(rng));
  cam.intrinsics(1, 2) = h * (0.4 + 0.2 * u(rng));
  return cam;
}

inline Box3D random_box(std::mt19937_64& rng, int classes, double extent = 20.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Box3D b;
  b.center = {extent * u(rng), extent * u(rng), 1.0 + 0.5 * u(rng)};
  b.size = {3.0 + 2.0 * u(rng), 1.8 + 0.5 * u(rng), 1.6 + 0.4 * u(rng)};
  b.yaw = M_PI * u(rng);
  if (b.yaw <= -M_PI) b.yaw = M_PI;
  b.class_id = std::uniform_int_distribution<int>(0, classes - 1)(rng);
  return b;
}

inline EgoPose pose_at(double x, double y, double yaw, double time = 0.0) {
  EgoPose p;
  p.world_from_ego = make_pose(yaw_rotation(yaw), {x, y, 0.0});
  p.timestamp = time;
  return p;
}

/// Containment from the box's vertex edges: the point must project onto each
/// of the three edges leaving vertex 0 within the edge's extent.
inline bool inside_box_by_edges(const Eigen::Vector3d& p, const Box3D& b) {
  const auto v = box_vertices(b);
  for (int corner : {4, 2, 1}) {
    const Eigen::Vector3d edge = v[corner] - v[0];
    const double s = (p - v[0]).dot(edge);
    if (s < 0.0 || s > edge.squaredNorm()) return false;
  }
  return true;
}

/// Same pose, twice the image width and twice the horizontal focal length
/// and principal point: every frustum anchor unprojects to the same ray.
inline Camera zoomed_twin(const Camera& cam) {
  Camera twin = cam;
  twin.name = cam.name + "_twin";
  twin.image_width = 2 * cam.image_width;
  twin.intrinsics(0, 0) *= 2.0;
  twin.intrinsics(0, 2) *= 2.0;
  return twin;
}

}  // namespace forge::testing
