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

// Object-wise position encoding and augmented spatial attention.
//
// Frustum points of every camera are lifted into the shared world frame,
// normalized to the region of interest, masked to the inside of 3-D boxes and
// encoded ray by ray: the D depth samples of one pixel anchor are flattened
// into a D*3 vector and mapped to C channels by an MLP stack.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "forge/geometry.hpp"
#include "forge/nn.hpp"
#include "forge/tensor.hpp"

namespace forge {

/// Boolean foreground mask over (N_c, W_F, H_F, D) frustum samples.
struct FrustumMask3D {
  Shape dims;
  std::vector<std::uint8_t> inside;

  std::size_t count() const;
  bool operator==(const FrustumMask3D&) const = default;
};

struct OpeConfig {
  std::size_t frustum_width = 50;   // W_F
  std::size_t frustum_height = 28;  // H_F
  std::size_t depth = 8;            // D
  std::size_t width = 64;           // C
  DepthConfig depth_cfg;
  Roi roi;
};

/// D*3 -> 4C -> 2C -> C with relu between layers.
MlpParams make_ope_encoder(std::size_t depth, std::size_t width, std::mt19937_64& rng);

/// World-frame frustum samples for every camera: (N_c, W_F, H_F, D, 3).
Tensor frustum_world_points(const CameraRig& rig, std::size_t frustum_width,
                            std::size_t frustum_height, std::size_t depth,
                            const DepthConfig& cfg = {});

/// Normalizes (N_c, W_F, H_F, D, 3) world points into (N_c, W_F, H_F, D*3).
Tensor normalize_frustum(const Tensor& world_points, const Roi& roi);

FrustumMask3D build_3d_mask(const Tensor& world_points, const std::vector<Box3D>& boxes);

/// E_o = MLP(P * M): (N_c, W_F, H_F, C).
Tensor object_position_embedding(const Tensor& normalized, const FrustumMask3D& mask,
                                 const MlpParams& encoder);
/// Accumulates the encoder gradient for upstream dE (N_c, W_F, H_F, C).
void object_position_embedding_backward(const Tensor& normalized, const FrustumMask3D& mask,
                                        const MlpParams& encoder, const Tensor& d_embedding,
                                        MlpParams& grad);

/// Nearest-neighbor map of (N_c, W_F, H_F, C) onto a row-major latent grid:
/// (N_c, H * W, C), position (h, w) taking anchor (w * W_F / W, h * H_F / H).
Tensor resample_to_latent(const Tensor& embedding, std::size_t latent_height,
                          std::size_t latent_width);

/// Z'_s = SelfAttn(Z_s + E_o) over the spatial axis of (B, HW, C).
Tensor augmented_spatial_attention(const Tensor& latents, const Tensor& embedding,
                                   const AttentionParams& attn);

/// Only the query projection is fine-tuned in this context, so the backward
/// pass reports the query-weight gradient and input gradients only.
struct AsaGradient {
  Tensor d_latents;
  Tensor d_embedding;
  Tensor d_query;
};

AsaGradient augmented_spatial_attention_backward(const Tensor& latents, const Tensor& embedding,
                                                 const AttentionParams& attn, const Tensor& dy);

}  // namespace forge
