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

// Perspective guidance: BEV road layouts and 3D boxes rasterized into each
// camera's image plane as one-hot category channels.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "forge/geometry.hpp"
#include "forge/tensor.hpp"

namespace forge {

inline constexpr double kNearPlane = 0.1;

/// Top-down category grid on the ground plane z = 0. Cell (r, c) covers
/// x in [origin.x + c * res, origin.x + (c + 1) * res) and the analogous
/// y interval for row r. Each cell holds a bitmask over road classes.
struct BevLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double resolution = 0.5;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  std::size_t num_classes = 4;
  std::vector<std::uint32_t> cells;

  static BevLayout empty(std::size_t rows, std::size_t cols, double resolution,
                         Eigen::Vector2d origin, std::size_t num_classes);

  void validate() const;
  std::uint32_t& cell(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
  std::uint32_t cell(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  /// Category bits at a ground point, or nullopt outside the grid.
  std::optional<std::uint32_t> lookup(double x, double y) const;
};

struct CanvasSize {
  std::size_t height = 1;
  std::size_t width = 1;
};

/// (C_road, H, W): each pixel's ray is intersected with z = 0 and takes the
/// hit cell's category bits. Rays at or above the horizon stay zero.
Tensor rasterize_layout(const BevLayout& layout, const CameraRig& rig, std::size_t cam_index,
                        CanvasSize size);

/// Canvas-space 2-D polygon of a box after near-plane clipping and
/// projection, as a convex hull in counter-clockwise order (image axes).
/// Empty when the box is entirely behind the near plane.
std::vector<Eigen::Vector2d> projected_box_hull(const Box3D& box, const Camera& cam,
                                                CanvasSize size);

/// Fills a convex polygon using pixel centers and the top-left rule.
void fill_convex(const std::vector<Eigen::Vector2d>& hull, double* plane, CanvasSize size);

/// (C_box, H, W): per box, the convex hull of its clipped, projected vertices
/// is filled in the box-class channel. Boxes of one class are unioned.
Tensor rasterize_boxes(const std::vector<Box3D>& boxes, const CameraRig& rig,
                       std::size_t cam_index, CanvasSize size, std::size_t num_box_classes);

/// Channel concatenation, road first.
Tensor compose_canvas(const Tensor& road, const Tensor& boxes);

/// Full per-camera stack (N_c, C_road + C_box, H, W).
Tensor perspective_canvas(const BevLayout& layout, const std::vector<Box3D>& boxes,
                          const CameraRig& rig, CanvasSize size, std::size_t num_box_classes);

/// Gray level for channel k of a C-channel canvas: round(255 * (k + 1) / C).
std::uint8_t category_gray(std::size_t channel, std::size_t channels);

/// Writes binary PGM images: one per channel (0 / 255) plus a composite
/// where each pixel takes the gray level of its highest active channel.
void dump_canvas_images(const Tensor& canvas, const std::filesystem::path& dir,
                        const std::string& stem);

}  // namespace forge
