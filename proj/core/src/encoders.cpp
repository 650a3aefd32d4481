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

#include "forge/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "forge/errors.hpp"

namespace forge {

CameraEncoder CameraEncoder::random(std::size_t width, int bands, std::mt19937_64& rng) {
  const std::size_t in = 2 * static_cast<std::size_t>(bands) * kCameraFeatures;
  return CameraEncoder{MlpParams::random({in, width, width}, rng), bands};
}

BoxEncoder BoxEncoder::random(std::size_t width, std::size_t classes, int bands,
                              std::mt19937_64& rng) {
  const std::size_t in = 2 * static_cast<std::size_t>(bands) * kBoxFeatures;
  BoxEncoder enc;
  enc.coord = MlpParams::random({in, width, width}, rng);
  enc.compress = MlpParams::random({2 * width, width, width}, rng);
  enc.label_table = Tensor::randn({classes, width}, rng, 1.0);
  enc.bands = bands;
  return enc;
}

std::vector<double> camera_features(const Camera& cam) {
  std::vector<double> f;
  f.reserve(kCameraFeatures);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) f.push_back(cam.intrinsics(r, c));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) f.push_back(cam.rotation(r, c));
  for (int r = 0; r < 3; ++r) f.push_back(cam.translation(r));
  return f;
}

std::vector<double> box_features(const Box3D& box) {
  std::vector<double> f;
  f.reserve(kBoxFeatures);
  for (const auto& v : box_vertices(box)) {
    f.push_back(v.x());
    f.push_back(v.y());
    f.push_back(v.z());
  }
  return f;
}

namespace {

Tensor as_row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor camera_input(const CameraRig& rig, std::size_t cam_index, int bands) {
  return as_row(fourier_embed(camera_features(rig.at(cam_index)), bands));
}

Tensor box_coord_input(const Box3D& box, int bands) {
  return as_row(fourier_embed(box_features(box), bands));
}

std::vector<double> to_vector(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

std::vector<double> encode_camera(const CameraRig& rig, std::size_t cam_index,
                                  const MlpParams& mlp, int bands) {
  const Tensor in = camera_input(rig, cam_index, bands);
  if (mlp.in_features() != in.size()) {
    throw ShapeError("encode_camera: encoder expects " + std::to_string(mlp.in_features()) +
                     " inputs, fourier features have " + std::to_string(in.size()));
  }
  return to_vector(mlp_forward(mlp, in));
}

std::vector<double> encode_camera(const CameraRig& rig, std::size_t cam_index,
                                  const CameraEncoder& enc) {
  return encode_camera(rig, cam_index, enc.mlp, enc.bands);
}

void encode_camera_backward(const CameraRig& rig, std::size_t cam_index, const CameraEncoder& enc,
                            std::span<const double> dy, CameraEncoder& grad) {
  const Tensor in = camera_input(rig, cam_index, enc.bands);
  mlp_backward(enc.mlp, in, as_row({dy.begin(), dy.end()}), grad.mlp);
}

namespace {

Tensor box_concat(const Box3D& box, const BoxEncoder& enc, Tensor& coord_in) {
  if (box.class_id < 0 || static_cast<std::size_t>(box.class_id) >= enc.label_table.dim(0)) {
    throw Error("encode_box: unknown class id " + std::to_string(box.class_id));
  }
  coord_in = box_coord_input(box, enc.bands);
  if (enc.coord.in_features() != coord_in.size()) {
    throw ShapeError("encode_box: coordinate encoder input width mismatch");
  }
  const Tensor coord = mlp_forward(enc.coord, coord_in);
  const std::size_t width = enc.label_table.dim(1);
  if (coord.size() != width || enc.compress.in_features() != 2 * width) {
    throw ShapeError("encode_box: label / coordinate / compress widths disagree");
  }
  Tensor cat({2 * width});
  const double* label = enc.label_table.data() + static_cast<std::size_t>(box.class_id) * width;
  std::copy(label, label + width, cat.data());
  std::copy(coord.values().begin(), coord.values().end(), cat.data() + width);
  return cat;
}

}  // namespace

std::vector<double> encode_box(const Box3D& box, const BoxEncoder& enc) {
  Tensor coord_in;
  return to_vector(mlp_forward(enc.compress, box_concat(box, enc, coord_in)));
}

void encode_box_backward(const Box3D& box, const BoxEncoder& enc, std::span<const double> dy,
                         BoxEncoder& grad) {
  Tensor coord_in;
  const Tensor cat = box_concat(box, enc, coord_in);
  const Tensor dcat = mlp_backward(enc.compress, cat, as_row({dy.begin(), dy.end()}), grad.compress);
  const std::size_t width = enc.label_table.dim(1);
  Tensor dcoord({width}, std::vector<double>(dcat.data() + width, dcat.data() + 2 * width));
  mlp_backward(enc.coord, coord_in, dcoord, grad.coord);
}

Tensor encode_grid(const Tensor& grid, const ConvStack& stack) {
  if (grid.rank() != 3 || grid.dim(0) != stack.in_channels()) {
    throw ShapeError("encode_grid: expected (" + std::to_string(stack.in_channels()) +
                     ", H, W), got " + shape_string(grid.dims()));
  }
  return conv_stack_forward(stack, grid);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Tensor text_stub(std::string_view prompt, std::size_t width) {
  if (width == 0) throw ShapeError("text_stub: width must be >= 1");
  std::istringstream is{std::string(prompt)};
  std::vector<std::string> tokens;
  for (std::string tok; is >> tok;) tokens.push_back(tok);
  if (tokens.empty()) return Tensor({1, width});
  Tensor out({tokens.size(), width});
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::uint64_t state = fnv1a(tokens[t]);
    for (std::size_t c = 0; c < width; ++c) {
      // 53-bit mantissa -> uniform [-1, 1).
      const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
      out[t * width + c] = (2.0 * u - 1.0) * scale * std::sqrt(3.0);
    }
  }
  return out;
}

EncoderBank EncoderBank::create(const EncoderConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EncoderBank bank;
  bank.config = cfg;
  bank.camera = CameraEncoder::random(cfg.width, cfg.bands, rng);
  bank.box = BoxEncoder::random(cfg.width, cfg.box_classes, cfg.bands, rng);
  bank.layout = ConvStack::downsample4(cfg.road_classes, cfg.grid_hidden, cfg.grid_out, rng);
  bank.canvas =
      ConvStack::downsample4(cfg.road_classes + cfg.box_classes, cfg.grid_hidden, cfg.grid_out, rng);
  return bank;
}

Tensor ConditionEmbeddings::tokens() const {
  Tensor out = concat_leading(text, camera);
  if (!box.empty()) out = concat_leading(out, box);
  return out;
}

}  // namespace forge
