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

#include "forge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "forge/errors.hpp"

namespace forge {
namespace {

constexpr double kRotationTol = 1e-9;

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace

// ---------------------------------------------------------------- camera

void Camera::validate() const {
  const auto& k = intrinsics;
  if (!k.allFinite() || !rotation.allFinite() || !translation.allFinite()) {
    throw NumericError("camera " + name + ": non-finite calibration");
  }
  if (k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0 || k(2, 2) != 1.0) {
    throw Error("camera " + name + ": intrinsics must be upper-triangular with K[2][2] = 1");
  }
  if (!(k(0, 0) > 0.0) || !(k(1, 1) > 0.0)) {
    throw Error("camera " + name + ": focal lengths must be positive");
  }
  if (!is_rotation(rotation, kRotationTol)) {
    throw Error("camera " + name + ": rotation is not orthonormal with det +1");
  }
  if (image_height < 1 || image_width < 1) throw Error("camera " + name + ": empty image size");
}

Eigen::Vector3d Camera::to_camera(const Eigen::Vector3d& p_world) const {
  return rotation.transpose() * (p_world - translation);
}

Eigen::Vector3d Camera::to_world(const Eigen::Vector3d& p_cam) const {
  return rotation * p_cam + translation;
}

const Camera& CameraRig::at(std::size_t i) const {
  if (i >= cameras.size()) {
    throw Error("camera index " + std::to_string(i) + " out of range for rig of " +
                std::to_string(cameras.size()));
  }
  return cameras[i];
}

void CameraRig::validate() const {
  if (cameras.empty()) throw Error("camera rig is empty");
  for (const auto& c : cameras) c.validate();
}

void Box3D::validate() const {
  if (!center.allFinite() || !size.allFinite() || !std::isfinite(yaw)) {
    throw NumericError("box: non-finite geometry");
  }
  if ((size.array() <= 0.0).any()) throw Error("box: sizes must be positive");
  if (!(yaw > -std::numbers::pi && yaw <= std::numbers::pi)) {
    throw Error("box: yaw must lie in (-pi, pi]");
  }
  if (class_id < 0) throw Error("box: negative class id");
}

void Roi::validate() const {
  if (!((min.array() < max.array()).all())) throw Error("roi: min must be < max on every axis");
}

void EgoPose::validate() const {
  if (!is_rigid(world_from_ego)) throw Error("ego pose is not a rigid transform");
}

// ---------------------------------------------------------------- frustum

std::vector<double> depth_samples(std::size_t count, const DepthConfig& cfg) {
  if (count == 0) throw Error("depth sample count must be >= 1");
  if (!(cfg.near > 0.0) || !(cfg.far > cfg.near)) throw Error("depth range must satisfy 0 < near < far");
  std::vector<double> d(count);
  if (count == 1) {
    d[0] = cfg.near;
    return d;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    d[i] = cfg.spacing == DepthSpacing::kLinear
               ? cfg.near + (cfg.far - cfg.near) * f
               : cfg.near * std::pow(cfg.far / cfg.near, f);
  }
  return d;
}

Eigen::Vector3d unproject(const Camera& cam, double u_px, double v_px, double depth) {
  const auto& k = cam.intrinsics;
  if (std::abs(k.determinant()) < 1e-12) throw Error("camera " + cam.name + ": singular intrinsics");
  // Upper-triangular K inverted by back substitution.
  const double y = (v_px - k(1, 2)) / k(1, 1);
  const double x = (u_px - k(0, 2) - k(0, 1) * y) / k(0, 0);
  return Eigen::Vector3d(x * depth, y * depth, depth);
}

FrustumGrid frustum_points(const CameraRig& rig, std::size_t cam_index, std::size_t width,
                           std::size_t height, std::size_t depth, const DepthConfig& cfg) {
  const Camera& cam = rig.at(cam_index);
  if (width == 0 || height == 0 || depth == 0) throw Error("frustum extents must be >= 1");
  FrustumGrid g;
  g.width = width;
  g.height = height;
  g.depth = depth;
  g.depths = depth_samples(depth, cfg);
  g.points = Tensor({width, height, depth, 3});
  const double sx = static_cast<double>(cam.image_width) / static_cast<double>(width);
  const double sy = static_cast<double>(cam.image_height) / static_cast<double>(height);
  double* out = g.points.data();
  for (std::size_t u = 0; u < width; ++u) {
    const double u_px = (static_cast<double>(u) + 0.5) * sx;
    for (std::size_t v = 0; v < height; ++v) {
      const double v_px = (static_cast<double>(v) + 0.5) * sy;
      for (std::size_t d = 0; d < depth; ++d) {
        const Eigen::Vector3d p = unproject(cam, u_px, v_px, g.depths[d]);
        out[0] = p.x();
        out[1] = p.y();
        out[2] = p.z();
        out += 3;
      }
    }
  }
  return g;
}

Tensor cam_to_world(const FrustumGrid& grid, const CameraRig& rig, std::size_t cam_index) {
  const Camera& cam = rig.at(cam_index);
  Tensor out(grid.points.dims());
  const std::size_t n = grid.points.size() / 3;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p(grid.points[3 * i], grid.points[3 * i + 1], grid.points[3 * i + 2]);
    const Eigen::Vector3d w = cam.to_world(p);
    out[3 * i] = w.x();
    out[3 * i + 1] = w.y();
    out[3 * i + 2] = w.z();
  }
  return out;
}

Tensor world_to_cam(const Tensor& world_points, const CameraRig& rig, std::size_t cam_index) {
  const Camera& cam = rig.at(cam_index);
  if (world_points.rank() == 0 || world_points.dims().back() != 3) {
    throw ShapeError("world_to_cam: last axis must be 3");
  }
  Tensor out(world_points.dims());
  const std::size_t n = world_points.size() / 3;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p(world_points[3 * i], world_points[3 * i + 1], world_points[3 * i + 2]);
    const Eigen::Vector3d c = cam.to_camera(p);
    out[3 * i] = c.x();
    out[3 * i + 1] = c.y();
    out[3 * i + 2] = c.z();
  }
  return out;
}

NormalizedPoints normalize_roi(const Tensor& points, const Roi& roi) {
  roi.validate();
  if (points.rank() == 0 || points.dims().back() != 3) {
    throw ShapeError("normalize_roi: last axis must be 3, got " + shape_string(points.dims()));
  }
  NormalizedPoints out{Tensor(points.dims()), std::vector<std::uint8_t>(points.size() / 3, 1)};
  for (std::size_t i = 0; i < out.in_roi.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double v = (points[3 * i + a] - roi.min[a]) / (roi.max[a] - roi.min[a]);
      if (v < 0.0 || v > 1.0) out.in_roi[i] = 0;
      out.points[3 * i + a] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------- boxes

std::array<Eigen::Vector3d, 8> box_vertices(const Box3D& box) {
  const Eigen::Matrix3d r = yaw_rotation(box.yaw);
  const Eigen::Vector3d half = box.size / 2.0;
  std::array<Eigen::Vector3d, 8> v;
  for (int k = 0; k < 8; ++k) {
    const Eigen::Vector3d local((k & 4) ? half.x() : -half.x(), (k & 2) ? half.y() : -half.y(),
                                (k & 1) ? half.z() : -half.z());
    v[k] = r * local + box.center;
  }
  return v;
}

bool point_in_box(const Eigen::Vector3d& p, const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Eigen::Vector3d d = p - box.center;
  const double lx = c * d.x() + s * d.y();
  const double ly = -s * d.x() + c * d.y();
  return std::abs(lx) <= box.size.x() / 2.0 && std::abs(ly) <= box.size.y() / 2.0 &&
         std::abs(d.z()) <= box.size.z() / 2.0;
}

// ---------------------------------------------------------------- poses

bool is_rigid(const Eigen::Matrix4d& m, double tol) {
  if (!m.allFinite()) return false;
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) return false;
  return is_rotation(m.topLeftCorner<3, 3>(), tol);
}

Eigen::Matrix4d rigid_inverse(const Eigen::Matrix4d& m) {
  if (!is_rigid(m)) throw Error("pose is not an invertible rigid transform");
  const Eigen::Matrix3d rt = m.topLeftCorner<3, 3>().transpose();
  Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -rt * m.topRightCorner<3, 1>();
  return inv;
}

Eigen::Matrix4d relative_pose(const EgoPose& prev, const EgoPose& cur) {
  if (!is_rigid(cur.world_from_ego)) throw Error("relative_pose: current pose is not rigid");
  return rigid_inverse(prev.world_from_ego) * cur.world_from_ego;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a, two_pi);
  if (w > std::numbers::pi) w -= two_pi;
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

Eigen::Matrix4d make_pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

Box3D box_to_ego(const Box3D& box, const EgoPose& pose) {
  const Eigen::Matrix4d ego_from_world = rigid_inverse(pose.world_from_ego);
  Box3D out = box;
  out.center = ego_from_world.topLeftCorner<3, 3>() * box.center + ego_from_world.topRightCorner<3, 1>();
  const Eigen::Matrix3d r = pose.world_from_ego.topLeftCorner<3, 3>();
  out.yaw = wrap_angle(box.yaw - std::atan2(r(1, 0), r(0, 0)));
  return out;
}

}  // namespace forge
