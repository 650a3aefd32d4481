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

// Camera model, rigid transforms and frustum sampling.
//
// Conventions: camera frames are x right, y down, z forward (optical axis).
// A camera's rotation/translation map camera coordinates into the common
// (ego / world) frame: p_world = R * p_cam + T. Boxes are yaw-rotated about
// the world z axis. All units are meters and pixels.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forge/tensor.hpp"

namespace forge {

struct Camera {
  std::string name;
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();  // K, pixels
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();    // R, camera -> world
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();     // T, meters
  int image_height = 1;
  int image_width = 1;

  /// Throws if K is not upper-triangular with positive focals or R is not a rotation.
  void validate() const;
  /// World point to camera frame.
  Eigen::Vector3d to_camera(const Eigen::Vector3d& p_world) const;
  Eigen::Vector3d to_world(const Eigen::Vector3d& p_cam) const;
};

struct CameraRig {
  std::vector<Camera> cameras;

  std::size_t size() const { return cameras.size(); }
  const Camera& at(std::size_t i) const;
  void validate() const;
};

struct Box3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();  // (length, width, height)
  double yaw = 0.0;                                // radians in (-pi, pi]
  int class_id = 0;

  void validate() const;
};

struct Roi {
  Eigen::Vector3d min{-50.0, -50.0, -5.0};
  Eigen::Vector3d max{50.0, 50.0, 3.0};

  void validate() const;
};

struct EgoPose {
  Eigen::Matrix4d world_from_ego = Eigen::Matrix4d::Identity();
  double timestamp = 0.0;

  void validate() const;
};

enum class DepthSpacing { kLinear, kLog };

struct DepthConfig {
  double near = 1.0;
  double far = 60.0;
  DepthSpacing spacing = DepthSpacing::kLinear;
};

std::vector<double> depth_samples(std::size_t count, const DepthConfig& cfg);

/// Camera-frame point at z-depth `depth` along the ray through pixel (u, v).
Eigen::Vector3d unproject(const Camera& cam, double u_px, double v_px, double depth);

struct FrustumGrid {
  std::size_t width = 0;   // W_F
  std::size_t height = 0;  // H_F
  std::size_t depth = 0;   // D
  std::vector<double> depths;
  Tensor points;  // (W_F, H_F, D, 3), camera frame
};

/// Cell-centered pixel anchors over the full image, D depth samples each.
FrustumGrid frustum_points(const CameraRig& rig, std::size_t cam_index, std::size_t width,
                           std::size_t height, std::size_t depth, const DepthConfig& cfg = {});

/// (W_F, H_F, D, 3) camera-frame points -> world frame of camera `cam_index`.
Tensor cam_to_world(const FrustumGrid& grid, const CameraRig& rig, std::size_t cam_index);
/// Inverse of cam_to_world for any (..., 3) point tensor.
Tensor world_to_cam(const Tensor& world_points, const CameraRig& rig, std::size_t cam_index);

struct NormalizedPoints {
  Tensor points;                     // same shape as the input, values in [0, 1]
  std::vector<std::uint8_t> in_roi;  // one flag per 3-vector
};

/// (p - min) / (max - min) per axis; out-of-roi points are clamped and flagged.
NormalizedPoints normalize_roi(const Tensor& points, const Roi& roi);

/// Vertex k has box-frame offsets (sx * l/2, sy * w/2, sz * h/2) with
/// sx = bit 2 of k, sy = bit 1, sz = bit 0 (set bit = +, clear bit = -),
/// i.e. (-,-,-), (-,-,+), (-,+,-), (-,+,+), (+,-,-), ... , (+,+,+).
std::array<Eigen::Vector3d, 8> box_vertices(const Box3D& box);

/// Boundary-inclusive containment in the box's yaw-aligned frame.
bool point_in_box(const Eigen::Vector3d& p, const Box3D& box);

/// prev^-1 * cur: the current ego frame expressed in the previous one.
Eigen::Matrix4d relative_pose(const EgoPose& prev, const EgoPose& cur);

Eigen::Matrix4d rigid_inverse(const Eigen::Matrix4d& m);
bool is_rigid(const Eigen::Matrix4d& m, double tol = 1e-6);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

Eigen::Matrix3d yaw_rotation(double yaw);
Eigen::Matrix4d make_pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t);

/// Express a world-frame box in the ego frame of `pose`.
Box3D box_to_ego(const Box3D& box, const EgoPose& pose);

}  // namespace forge
