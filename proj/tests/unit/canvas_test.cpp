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
#include <fstream>
#include <random>

#include "canvas_oracle.hpp"
#include "forge/canvas.hpp"
#include "forge/errors.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

using testing::make_camera;

TEST(BevLayout, LookupUsesFloorDivisionFromOrigin) {
  BevLayout l = BevLayout::empty(2, 3, 0.5, {-1.0, 2.0}, 4);
  l.cell(1, 2) = 0b1010;
  EXPECT_EQ(l.lookup(0.0, 2.5), 0b1010u);
  EXPECT_EQ(l.lookup(0.49, 2.99), 0b1010u);
  EXPECT_EQ(l.lookup(-1.0, 2.0), 0u);
  EXPECT_FALSE(l.lookup(0.5, 2.5).has_value());
  EXPECT_FALSE(l.lookup(-1.01, 2.5).has_value());
}

TEST(BevLayout, ValidateRejectsBadGrids) {
  BevLayout l = BevLayout::empty(2, 2, 1.0, {0, 0}, 2);
  l.cells[0] = 0b100;
  EXPECT_THROW(l.validate(), Error);
  EXPECT_THROW(BevLayout::empty(0, 2, 1.0, {0, 0}, 2), Error);
  EXPECT_THROW(BevLayout::empty(2, 2, -1.0, {0, 0}, 2), Error);
  l = BevLayout::empty(2, 2, 1.0, {0, 0}, 2);
  l.cells.pop_back();
  EXPECT_THROW(l.validate(), ShapeError);
}

TEST(RasterizeLayout, ForwardCameraSeesGroundInLowerHalfOnly) {
  CameraRig rig{{make_camera(0.0, 0.0, {0, 0, 1.5})}};
  BevLayout l = BevLayout::empty(200, 200, 0.5, {-50, -50}, 1);
  std::fill(l.cells.begin(), l.cells.end(), 1u);
  const Tensor t = rasterize_layout(l, rig, 0, {16, 16});
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(t.at({0, i, j}), i >= 8 ? 1.0 : 0.0) << i << "," << j;
  }
}

TEST(RasterizeLayout, MatchesRayGroundOracleOnRandomScenes) {
  std::mt19937_64 rng(21);
  for (int scene = 0; scene < 5; ++scene) {
    CameraRig rig{{testing::random_camera(rng), testing::random_camera(rng)}};
    const BevLayout l = testing::random_layout(rng, 80, 80, 0.5, 4);
    for (std::size_t c = 0; c < rig.size(); ++c) {
      for (CanvasSize s : {CanvasSize{32, 32}, CanvasSize{20, 44}}) {
        const Tensor got = rasterize_layout(l, rig, c, s);
        EXPECT_TRUE(got.identical(testing::layout_oracle(l, rig.cameras[c], s)));
      }
    }
  }
}

TEST(RasterizeLayout, RowsAboveHorizonStayEmpty) {
  CameraRig rig{{make_camera(0.0, -0.4, {0, 0, 1.5})}};
  BevLayout l = BevLayout::empty(10, 10, 1.0, {-5, -5}, 1);
  std::fill(l.cells.begin(), l.cells.end(), 1u);
  const Tensor t = rasterize_layout(l, rig, 0, {8, 8});
  EXPECT_EQ(t.at({0, 0, 4}), 0.0);
}

TEST(ProjectedBoxHull, BoxBehindCameraIsEmpty) {
  const Camera cam = make_camera(0.0, 0.0, {0, 0, 1.5});
  Box3D b;
  b.center = {-10, 0, 1};
  EXPECT_TRUE(projected_box_hull(b, cam, {32, 48}).empty());
}

TEST(ProjectedBoxHull, CenteredCubeProjectsToSymmetricSquare) {
  Camera cam = make_camera(0.0, 0.0, {0, 0, 0}, 32, 48, 30.0);
  Box3D b;
  b.center = {10.5, 0, 0};
  b.size = {1, 2, 2};
  // Nearest face at depth 10 spans +-1 m: +-3 px around the principal point.
  const auto hull = projected_box_hull(b, cam, {32, 48});
  ASSERT_EQ(hull.size(), 4u);
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const auto& p : hull) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  EXPECT_NEAR(xmin, 21.0, 1e-12);
  EXPECT_NEAR(xmax, 27.0, 1e-12);
  EXPECT_NEAR(ymin, 13.0, 1e-12);
  EXPECT_NEAR(ymax, 19.0, 1e-12);
}

TEST(FillConvex, PixelCentersWithHalfOpenBounds) {
  std::vector<double> plane(6 * 6, 0.0);
  fill_convex({{1.0, 1.0}, {4.0, 1.0}, {4.0, 3.5}, {1.0, 3.5}}, plane.data(), {6, 6});
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const bool inside = i + 0.5 >= 1.0 && i + 0.5 < 3.5 && j + 0.5 >= 1.0 && j + 0.5 < 4.0;
      EXPECT_EQ(plane[i * 6 + j], inside ? 1.0 : 0.0) << i << "," << j;
    }
  }
}

TEST(FillConvex, DegenerateHullFillsNothing) {
  std::vector<double> plane(16, 0.0);
  fill_convex({{0.0, 0.0}, {3.0, 3.0}}, plane.data(), {4, 4});
  for (double v : plane) EXPECT_EQ(v, 0.0);
}

TEST(RasterizeBoxes, MatchesRayBoxOracleIncludingNearPlaneClipping) {
  std::mt19937_64 rng(22);
  std::size_t filled = 0;
  for (int scene = 0; scene < 10; ++scene) {
    CameraRig rig{{testing::random_camera(rng)}};
    std::vector<Box3D> boxes;
    for (int k = 0; k < 6; ++k) boxes.push_back(testing::random_box(rng, 3, 8.0));
    const CanvasSize s{32, 48};
    const Tensor got = rasterize_boxes(boxes, rig, 0, s, 3);
    EXPECT_EQ(testing::mismatches(got, testing::boxes_oracle(boxes, rig.cameras[0], s, 3)), 0u)
        << "scene " << scene;
    for (double v : got.values()) filled += v != 0.0;
  }
  EXPECT_GT(filled, 0u);
}

TEST(RasterizeBoxes, SameClassBoxesAreUnioned) {
  CameraRig rig{{make_camera(0.0, 0.0, {0, 0, 0})}};
  Box3D a, b;
  a.center = {10, 1, 0};
  b.center = {10, -1, 0};
  const Tensor both = rasterize_boxes({a, b}, rig, 0, {32, 48}, 1);
  const Tensor ta = rasterize_boxes({a}, rig, 0, {32, 48}, 1);
  const Tensor tb = rasterize_boxes({b}, rig, 0, {32, 48}, 1);
  for (std::size_t i = 0; i < both.size(); ++i) EXPECT_EQ(both[i], std::max(ta[i], tb[i]));
}

TEST(RasterizeBoxes, RejectsOutOfRangeClassAndBadSize) {
  CameraRig rig{{make_camera(0.0, 0.0, {0, 0, 0})}};
  Box3D b;
  b.class_id = 2;
  EXPECT_THROW(rasterize_boxes({b}, rig, 0, {8, 8}, 2), Error);
  EXPECT_THROW(rasterize_boxes({}, rig, 0, {0, 8}, 2), Error);
  b.class_id = 0;
  b.size = {1, -1, 1};
  EXPECT_THROW(rasterize_boxes({b}, rig, 0, {8, 8}, 2), Error);
}

TEST(Canvas, ComposeStacksRoadThenBoxes) {
  const Tensor road({2, 3, 4}, 1.0), boxes({3, 3, 4}, 0.0);
  const Tensor c = compose_canvas(road, boxes);
  EXPECT_EQ(c.dims(), (Shape{5, 3, 4}));
  EXPECT_EQ(c.at({1, 2, 3}), 1.0);
  EXPECT_EQ(c.at({2, 0, 0}), 0.0);
  EXPECT_THROW(compose_canvas(road, Tensor({3, 3, 5})), ShapeError);
}

TEST(Canvas, PerspectiveCanvasStacksCameras) {
  std::mt19937_64 rng(23);
  CameraRig rig{{testing::random_camera(rng), testing::random_camera(rng), testing::random_camera(rng)}};
  const BevLayout l = testing::random_layout(rng, 40, 40, 1.0, 2);
  const std::vector<Box3D> boxes{testing::random_box(rng, 2, 6.0)};
  const Tensor all = perspective_canvas(l, boxes, rig, {8, 12}, 2);
  EXPECT_EQ(all.dims(), (Shape{3, 4, 8, 12}));
  const Tensor second = compose_canvas(rasterize_layout(l, rig, 1, {8, 12}), rasterize_boxes(boxes, rig, 1, {8, 12}, 2));
  EXPECT_TRUE(slice_leading(all, 1, 1).reshaped(second.dims()).identical(second));
}

TEST(CategoryGray, RoundedEvenSpacing) {
  EXPECT_EQ(category_gray(0, 14), 18);
  EXPECT_EQ(category_gray(13, 14), 255);
  EXPECT_EQ(category_gray(0, 3), 85);
  EXPECT_EQ(category_gray(1, 3), 170);
  EXPECT_EQ(category_gray(0, 1), 255);
}

TEST(DumpCanvasImages, WritesChannelAndCompositePgm) {
  const auto dir = std::filesystem::temp_directory_path() / "forge_canvas_dump_test";
  std::filesystem::remove_all(dir);
  Tensor c({2, 2, 3});
  c.at({0, 0, 0}) = 1.0;
  c.at({1, 0, 0}) = 1.0;
  c.at({0, 1, 2}) = 1.0;
  dump_canvas_images(c, dir, "cam");
  EXPECT_TRUE(std::filesystem::exists(dir / "cam_ch0.pgm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "cam_ch1.pgm"));
  std::ifstream is(dir / "cam_composite.pgm", std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  is >> magic >> w >> h >> maxv;
  is.get();
  std::vector<unsigned char> px(6);
  is.read(reinterpret_cast<char*>(px.data()), 6);
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 2);
  EXPECT_EQ(px[0], category_gray(1, 2));
  EXPECT_EQ(px[5], category_gray(0, 2));
  EXPECT_EQ(px[1], 0);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace forge
