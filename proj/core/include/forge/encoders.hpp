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

// Conditional embedding bank: camera, box, grid (layout / canvas) encoders
// and a deterministic hash-seeded text embedding.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "forge/geometry.hpp"
#include "forge/nn.hpp"
#include "forge/tensor.hpp"

namespace forge {

inline constexpr std::size_t kCameraFeatures = 21;  // K (9) + R (9) + T (3)
inline constexpr std::size_t kBoxFeatures = 24;     // 8 vertices x 3

struct CameraEncoder {
  MlpParams mlp;  // 2 * bands * 21 -> C -> C
  int bands = 8;

  static CameraEncoder random(std::size_t width, int bands, std::mt19937_64& rng);

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    MlpParams::visit(self.mlp, prefixed("mlp.", fn));
  }
};

struct BoxEncoder {
  MlpParams coord;     // 2 * bands * 24 -> C -> C
  MlpParams compress;  // 2C -> C -> C
  Tensor label_table;  // (classes, C); frozen, not visited as a parameter
  int bands = 8;

  static BoxEncoder random(std::size_t width, std::size_t classes, int bands, std::mt19937_64& rng);

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    MlpParams::visit(self.coord, prefixed("coord.", fn));
    MlpParams::visit(self.compress, prefixed("compress.", fn));
  }
};

/// Flattened (K row-major, R row-major, T) of one camera.
std::vector<double> camera_features(const Camera& cam);
/// Flattened box vertices in canonical order.
std::vector<double> box_features(const Box3D& box);

std::vector<double> encode_camera(const CameraRig& rig, std::size_t cam_index,
                                  const MlpParams& mlp, int bands);
std::vector<double> encode_camera(const CameraRig& rig, std::size_t cam_index,
                                  const CameraEncoder& enc);
/// Accumulates the parameter gradient for upstream gradient `dy` (length C).
void encode_camera_backward(const CameraRig& rig, std::size_t cam_index, const CameraEncoder& enc,
                            std::span<const double> dy, CameraEncoder& grad);

std::vector<double> encode_box(const Box3D& box, const BoxEncoder& enc);
void encode_box_backward(const Box3D& box, const BoxEncoder& enc, std::span<const double> dy,
                         BoxEncoder& grad);

/// Stride-downsampling conv stack over a (C_in, H, W) grid.
Tensor encode_grid(const Tensor& grid, const ConvStack& stack);

/// Whitespace-tokenized, hash-seeded (n_tok, width) embedding. The empty
/// prompt maps to a single all-zero row.
Tensor text_stub(std::string_view prompt, std::size_t width);

struct EncoderConfig {
  std::size_t width = 64;  // shared token width C
  int bands = 8;
  std::size_t road_classes = 4;
  std::size_t box_classes = 10;
  std::size_t grid_hidden = 8;
  std::size_t grid_out = 4;  // matches latent channels for concatenation
};

struct EncoderBank {
  EncoderConfig config;
  CameraEncoder camera;
  BoxEncoder box;
  ConvStack layout;  // road_classes -> grid_out
  ConvStack canvas;  // road_classes + box_classes -> grid_out

  static EncoderBank create(const EncoderConfig& cfg, std::uint64_t seed);
};

struct ConditionEmbeddings {
  Tensor text;    // (n_tok, C)
  Tensor camera;  // (N_c, C)
  Tensor box;     // (N_box, C); empty when the scene has no boxes
  Tensor layout;  // (grid_out, H', W')
  Tensor canvas;  // (N_c, grid_out, H', W')

  /// text, camera and box rows stacked along the token axis.
  Tensor tokens() const;
};

}  // namespace forge
