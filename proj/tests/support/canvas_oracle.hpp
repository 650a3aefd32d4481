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

// Per-pixel reference rasterizers used by the canvas tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "forge/canvas.hpp"

namespace forge::testing {

/// Random layout with each cell holding random category bits.
inline BevLayout random_layout(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                               double resolution, std::size_t classes) {
  BevLayout l = BevLayout::empty(rows, cols, resolution,
                                 {-0.5 * cols * resolution, -0.5 * rows * resolution}, classes);
  std::uniform_int_distribution<std::uint32_t> bits(0, (1u << classes) - 1u);
  for (auto& c : l.cells) c = bits(rng);
  return l;
}

/// Pixel center ray through the camera center, intersected with z = 0 in
/// closed form, then the grid cell by floor division.
inline Tensor layout_oracle(const BevLayout& l, const Camera& cam, CanvasSize size) {
  Tensor out({l.num_classes, size.height, size.width});
  const double fx = cam.intrinsics(0, 0), fy = cam.intrinsics(1, 1);
  const double cx = cam.intrinsics(0, 2), cy = cam.intrinsics(1, 2);
  for (std::size_t i = 0; i < size.height; ++i) {
    for (std::size_t j = 0; j < size.width; ++j) {
      const double u = (j + 0.5) * cam.image_width / static_cast<double>(size.width);
      const double v = (i + 0.5) * cam.image_height / static_cast<double>(size.height);
      const Eigen::Vector3d d = cam.rotation * Eigen::Vector3d((u - cx) / fx, (v - cy) / fy, 1.0);
      if (d.z() >= 0.0) continue;
      const double s = -cam.translation.z() / d.z();
      const double x = cam.translation.x() + s * d.x();
      const double y = cam.translation.y() + s * d.y();
      const double c = std::floor((x - l.origin.x()) / l.resolution);
      const double r = std::floor((y - l.origin.y()) / l.resolution);
      if (c < 0 || r < 0 || c >= l.cols || r >= l.rows) continue;
      const std::uint32_t bits = l.cells[static_cast<std::size_t>(r) * l.cols + static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < l.num_classes; ++k) {
        if (bits >> k & 1u) out.at({k, i, j}) = 1.0;
      }
    }
  }
  return out;
}

/// True when the pixel-center ray, restricted to camera depth >= near,
/// passes through the box (slab test in the box frame).
inline bool ray_hits_box(const Camera& cam, const Box3D& b, double u, double v) {
  const double fx = cam.intrinsics(0, 0), fy = cam.intrinsics(1, 1);
  const double cx = cam.intrinsics(0, 2), cy = cam.intrinsics(1, 2);
  // Camera-frame ray with unit depth step, so the ray parameter is depth.
  const Eigen::Vector3d dc((u - cx) / fx, (v - cy) / fy, 1.0);
  const Eigen::Matrix3d box_from_world =
      Eigen::AngleAxisd(-b.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d o = box_from_world * (cam.translation - b.center);
  const Eigen::Vector3d d = box_from_world * (cam.rotation * dc);
  double t0 = kNearPlane, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double half = 0.5 * b.size[a];
    if (d[a] == 0.0) {
      if (std::abs(o[a]) > half) return false;
      continue;
    }
    double lo = (-half - o[a]) / d[a], hi = (half - o[a]) / d[a];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
  }
  return t0 <= t1;
}

inline Tensor boxes_oracle(const std::vector<Box3D>& boxes, const Camera& cam, CanvasSize size,
                           std::size_t classes) {
  Tensor out({classes, size.height, size.width});
  for (const auto& b : boxes) {
    for (std::size_t i = 0; i < size.height; ++i) {
      for (std::size_t j = 0; j < size.width; ++j) {
        const double u = (j + 0.5) * cam.image_width / static_cast<double>(size.width);
        const double v = (i + 0.5) * cam.image_height / static_cast<double>(size.height);
        if (ray_hits_box(cam, b, u, v)) out.at({static_cast<std::size_t>(b.class_id), i, j}) = 1.0;
      }
    }
  }
  return out;
}

/// Pixels where two binary canvases disagree.
inline std::size_t mismatches(const Tensor& a, const Tensor& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != 0.0) != (b[i] != 0.0);
  return n;
}

}  // namespace forge::testing
