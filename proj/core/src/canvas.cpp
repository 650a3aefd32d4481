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

#include "forge/canvas.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <fstream>
#include <limits>

#include "forge/errors.hpp"

namespace forge {

BevLayout BevLayout::empty(std::size_t rows, std::size_t cols, double resolution,
                           Eigen::Vector2d origin, std::size_t num_classes) {
  BevLayout l;
  l.rows = rows;
  l.cols = cols;
  l.resolution = resolution;
  l.origin = origin;
  l.num_classes = num_classes;
  l.cells.assign(rows * cols, 0u);
  l.validate();
  return l;
}

void BevLayout::validate() const {
  if (rows == 0 || cols == 0) throw Error("layout: grid must be non-empty");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw Error("layout: resolution must be positive");
  if (!origin.allFinite()) throw NumericError("layout: non-finite origin");
  if (num_classes == 0 || num_classes > 32) throw Error("layout: class count must be in [1, 32]");
  if (cells.size() != rows * cols) throw ShapeError("layout: cell count does not match rows * cols");
  const std::uint32_t allowed = num_classes == 32 ? ~0u : ((1u << num_classes) - 1u);
  for (auto c : cells) {
    if (c & ~allowed) throw Error("layout: category id exceeds class count");
  }
}

std::optional<std::uint32_t> BevLayout::lookup(double x, double y) const {
  const double fc = std::floor((x - origin.x()) / resolution);
  const double fr = std::floor((y - origin.y()) / resolution);
  if (fc < 0.0 || fr < 0.0 || fc >= static_cast<double>(cols) || fr >= static_cast<double>(rows)) {
    return std::nullopt;
  }
  return cell(static_cast<std::size_t>(fr), static_cast<std::size_t>(fc));
}

namespace {

void check_size(CanvasSize size) {
  if (size.height == 0 || size.width == 0) throw Error("canvas size must be at least 1x1");
}

}  // namespace

Tensor rasterize_layout(const BevLayout& layout, const CameraRig& rig, std::size_t cam_index,
                        CanvasSize size) {
  layout.validate();
  check_size(size);
  const Camera& cam = rig.at(cam_index);
  cam.validate();
  const std::size_t h = size.height, w = size.width, plane = h * w;
  Tensor out({layout.num_classes, h, w});
  const double sx = static_cast<double>(cam.image_width) / static_cast<double>(w);
  const double sy = static_cast<double>(cam.image_height) / static_cast<double>(h);
  const Eigen::Vector3d& origin = cam.translation;
  for (std::size_t i = 0; i < h; ++i) {
    const double v_px = (static_cast<double>(i) + 0.5) * sy;
    for (std::size_t j = 0; j < w; ++j) {
      const double u_px = (static_cast<double>(j) + 0.5) * sx;
      const Eigen::Vector3d dir = cam.rotation * unproject(cam, u_px, v_px, 1.0);
      if (!(dir.z() < 0.0)) continue;  // at or above the horizon
      const double s = -origin.z() / dir.z();
      if (!(s > 0.0)) continue;
      const auto bits = layout.lookup(origin.x() + s * dir.x(), origin.y() + s * dir.y());
      if (!bits || *bits == 0) continue;
      for (std::size_t k = 0; k < layout.num_classes; ++k) {
        if (*bits & (1u << k)) out[k * plane + i * w + j] = 1.0;
      }
    }
  }
  return out;
}

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

std::vector<Eigen::Vector2d> projected_box_hull(const Box3D& box, const Camera& cam,
                                                CanvasSize size) {
  const auto world = box_vertices(box);
  std::array<Eigen::Vector3d, 8> v;
  for (int k = 0; k < 8; ++k) v[k] = cam.to_camera(world[k]);

  std::vector<Eigen::Vector3d> kept;
  for (const auto& p : v) {
    if (p.z() >= kNearPlane) kept.push_back(p);
  }
  // 12 edges: vertex pairs differing in exactly one sign bit.
  for (int a = 0; a < 8; ++a) {
    for (int bit : {1, 2, 4}) {
      const int b = a ^ bit;
      if (b < a) continue;
      const bool in_a = v[a].z() >= kNearPlane;
      const bool in_b = v[b].z() >= kNearPlane;
      if (in_a == in_b) continue;
      const double t = (kNearPlane - v[a].z()) / (v[b].z() - v[a].z());
      Eigen::Vector3d p = v[a] + t * (v[b] - v[a]);
      p.z() = kNearPlane;
      kept.push_back(p);
    }
  }
  if (kept.empty()) return {};

  const auto& k = cam.intrinsics;
  const double sx = static_cast<double>(size.width) / static_cast<double>(cam.image_width);
  const double sy = static_cast<double>(size.height) / static_cast<double>(cam.image_height);
  std::vector<Eigen::Vector2d> uv;
  uv.reserve(kept.size());
  for (const auto& p : kept) {
    const double x = p.x() / p.z();
    const double y = p.y() / p.z();
    uv.emplace_back((k(0, 0) * x + k(0, 1) * y + k(0, 2)) * sx, (k(1, 1) * y + k(1, 2)) * sy);
  }
  return convex_hull(std::move(uv));
}

void fill_convex(const std::vector<Eigen::Vector2d>& hull, double* plane, CanvasSize size) {
  if (hull.size() < 3) return;
  double ymin = hull[0].y(), ymax = hull[0].y();
  for (const auto& p : hull) {
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const double h = static_cast<double>(size.height);
  const double w = static_cast<double>(size.width);
  // Rows whose center y = i + 0.5 lies in [ymin, ymax).
  const double first_row = std::max(0.0, std::ceil(ymin - 0.5));
  const double last_row = std::min(h, std::ceil(ymax - 0.5));
  for (double fi = first_row; fi < last_row; fi += 1.0) {
    const double y = fi + 0.5;
    double xl = std::numeric_limits<double>::infinity();
    double xr = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < hull.size(); ++e) {
      const auto& a = hull[e];
      const auto& b = hull[(e + 1) % hull.size()];
      const bool crosses = (a.y() <= y && y < b.y()) || (b.y() <= y && y < a.y());
      if (!crosses) continue;
      const double x = a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      xl = std::min(xl, x);
      xr = std::max(xr, x);
    }
    if (!(xl < xr)) continue;
    // Columns whose center x = j + 0.5 lies in [xl, xr).
    const double first_col = std::max(0.0, std::ceil(xl - 0.5));
    const double last_col = std::min(w, std::ceil(xr - 0.5));
    const std::size_t row = static_cast<std::size_t>(fi) * size.width;
    for (double fj = first_col; fj < last_col; fj += 1.0) {
      plane[row + static_cast<std::size_t>(fj)] = 1.0;
    }
  }
}

Tensor rasterize_boxes(const std::vector<Box3D>& boxes, const CameraRig& rig,
                       std::size_t cam_index, CanvasSize size, std::size_t num_box_classes) {
  check_size(size);
  if (num_box_classes == 0) throw Error("box canvas needs at least one class");
  const Camera& cam = rig.at(cam_index);
  cam.validate();
  Tensor out({num_box_classes, size.height, size.width});
  const std::size_t plane = size.height * size.width;
  for (const auto& box : boxes) {
    box.validate();
    if (static_cast<std::size_t>(box.class_id) >= num_box_classes) {
      throw Error("box class id " + std::to_string(box.class_id) + " exceeds box class count " +
                  std::to_string(num_box_classes));
    }
    const auto hull = projected_box_hull(box, cam, size);
    fill_convex(hull, out.data() + static_cast<std::size_t>(box.class_id) * plane, size);
  }
  return out;
}

Tensor compose_canvas(const Tensor& road, const Tensor& boxes) {
  if (road.rank() != 3 || boxes.rank() != 3 || road.dim(1) != boxes.dim(1) ||
      road.dim(2) != boxes.dim(2)) {
    throw ShapeError("compose_canvas: spatial extents differ: " + shape_string(road.dims()) +
                     " vs " + shape_string(boxes.dims()));
  }
  return concat_leading(road, boxes);
}

Tensor perspective_canvas(const BevLayout& layout, const std::vector<Box3D>& boxes,
                          const CameraRig& rig, CanvasSize size, std::size_t num_box_classes) {
  const std::size_t channels = layout.num_classes + num_box_classes;
  Tensor out({rig.size(), channels, size.height, size.width});
  const std::size_t per_cam = channels * size.height * size.width;
  for (std::size_t c = 0; c < rig.size(); ++c) {
    const Tensor canvas = compose_canvas(rasterize_layout(layout, rig, c, size),
                                         rasterize_boxes(boxes, rig, c, size, num_box_classes));
    std::copy(canvas.values().begin(), canvas.values().end(), out.data() + c * per_cam);
  }
  return out;
}

std::uint8_t category_gray(std::size_t channel, std::size_t channels) {
  return static_cast<std::uint8_t>(
      std::lround(255.0 * static_cast<double>(channel + 1) / static_cast<double>(channels)));
}

namespace {

void write_pgm(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels,
               std::size_t h, std::size_t w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << "P5\n" << w << ' ' << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace

void dump_canvas_images(const Tensor& canvas, const std::filesystem::path& dir,
                        const std::string& stem) {
  if (canvas.rank() != 3) throw ShapeError("dump_canvas_images: expected (C, H, W)");
  const std::size_t c = canvas.dim(0), h = canvas.dim(1), w = canvas.dim(2);
  std::filesystem::create_directories(dir);
  std::vector<std::uint8_t> composite(h * w, 0);
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<std::uint8_t> img(h * w, 0);
    for (std::size_t p = 0; p < h * w; ++p) {
      if (canvas[k * h * w + p] != 0.0) {
        img[p] = 255;
        composite[p] = category_gray(k, c);
      }
    }
    write_pgm(dir / (stem + "_ch" + std::to_string(k) + ".pgm"), img, h, w);
  }
  write_pgm(dir / (stem + "_composite.pgm"), composite, h, w);
}

}  // namespace forge
