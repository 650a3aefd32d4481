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

#include "forge/ope.hpp"

#include <algorithm>
#include <numeric>

#include "forge/errors.hpp"

namespace forge {

std::size_t FrustumMask3D::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

MlpParams make_ope_encoder(std::size_t depth, std::size_t width, std::mt19937_64& rng) {
  return MlpParams::random({3 * depth, 4 * width, 2 * width, width}, rng);
}

Tensor frustum_world_points(const CameraRig& rig, std::size_t frustum_width,
                            std::size_t frustum_height, std::size_t depth,
                            const DepthConfig& cfg) {
  Tensor out({rig.size(), frustum_width, frustum_height, depth, 3});
  const std::size_t per_cam = frustum_width * frustum_height * depth * 3;
  for (std::size_t c = 0; c < rig.size(); ++c) {
    const FrustumGrid grid = frustum_points(rig, c, frustum_width, frustum_height, depth, cfg);
    const Tensor world = cam_to_world(grid, rig, c);
    std::copy(world.values().begin(), world.values().end(), out.data() + c * per_cam);
  }
  return out;
}

namespace {

void require_points5(const Tensor& t, const char* what) {
  if (t.rank() != 5 || t.dim(4) != 3) {
    throw ShapeError(std::string(what) + ": expected (N_c, W_F, H_F, D, 3), got " +
                     shape_string(t.dims()));
  }
}

}  // namespace

Tensor normalize_frustum(const Tensor& world_points, const Roi& roi) {
  require_points5(world_points, "normalize_frustum");
  const auto& d = world_points.dims();
  return normalize_roi(world_points, roi).points.reshaped({d[0], d[1], d[2], d[3] * 3});
}

FrustumMask3D build_3d_mask(const Tensor& world_points, const std::vector<Box3D>& boxes) {
  require_points5(world_points, "build_3d_mask");
  for (const auto& b : boxes) b.validate();
  const auto& d = world_points.dims();
  FrustumMask3D mask{{d[0], d[1], d[2], d[3]}, std::vector<std::uint8_t>(world_points.size() / 3, 0)};
  if (boxes.empty()) return mask;
  for (std::size_t i = 0; i < mask.inside.size(); ++i) {
    const Eigen::Vector3d p(world_points[3 * i], world_points[3 * i + 1], world_points[3 * i + 2]);
    for (const auto& b : boxes) {
      if (point_in_box(p, b)) {
        mask.inside[i] = 1;
        break;
      }
    }
  }
  return mask;
}

namespace {

struct MaskedRays {
  Tensor input;  // (rays, D*3), masked coordinates
  std::size_t rays = 0;
  std::size_t ray_width = 0;
};

MaskedRays masked_rays(const Tensor& normalized, const FrustumMask3D& mask,
                       const MlpParams& encoder) {
  if (normalized.rank() != 4 || normalized.dim(3) % 3 != 0) {
    throw ShapeError("object_position_embedding: expected (N_c, W_F, H_F, D*3), got " +
                     shape_string(normalized.dims()));
  }
  const auto& d = normalized.dims();
  const Shape expected_mask{d[0], d[1], d[2], d[3] / 3};
  if (mask.dims != expected_mask || mask.inside.size() != shape_size(expected_mask)) {
    throw ShapeError("object_position_embedding: mask " + shape_string(mask.dims) +
                     " incompatible with points " + shape_string(d));
  }
  if (encoder.in_features() != d[3]) {
    throw ShapeError("object_position_embedding: encoder expects " +
                     std::to_string(encoder.in_features()) + " inputs per ray, rays carry " +
                     std::to_string(d[3]));
  }
  MaskedRays r{Tensor({d[0] * d[1] * d[2], d[3]}), d[0] * d[1] * d[2], d[3]};
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (mask.inside[i / 3]) r.input[i] = normalized[i];
  }
  return r;
}

}  // namespace

Tensor object_position_embedding(const Tensor& normalized, const FrustumMask3D& mask,
                                 const MlpParams& encoder) {
  const MaskedRays rays = masked_rays(normalized, mask, encoder);
  const std::size_t width = encoder.out_features();
  const auto& d = normalized.dims();
  Tensor out({d[0], d[1], d[2], width});

  // Fully masked rays all map to MLP(0); evaluate the foreground rays only.
  std::vector<std::size_t> foreground;
  for (std::size_t r = 0; r < rays.rays; ++r) {
    const double* row = rays.input.data() + r * rays.ray_width;
    if (std::any_of(row, row + rays.ray_width, [](double v) { return v != 0.0; })) {
      foreground.push_back(r);
    }
  }
  const Tensor background = mlp_forward(encoder, Tensor({1, rays.ray_width}));
  for (std::size_t r = 0; r < rays.rays; ++r) {
    std::copy(background.values().begin(), background.values().end(), out.data() + r * width);
  }
  if (!foreground.empty()) {
    Tensor fg({foreground.size(), rays.ray_width});
    for (std::size_t k = 0; k < foreground.size(); ++k) {
      const double* src = rays.input.data() + foreground[k] * rays.ray_width;
      std::copy(src, src + rays.ray_width, fg.data() + k * rays.ray_width);
    }
    const Tensor encoded = mlp_forward(encoder, fg);
    for (std::size_t k = 0; k < foreground.size(); ++k) {
      const double* src = encoded.data() + k * width;
      std::copy(src, src + width, out.data() + foreground[k] * width);
    }
  }
  return out;
}

void object_position_embedding_backward(const Tensor& normalized, const FrustumMask3D& mask,
                                        const MlpParams& encoder, const Tensor& d_embedding,
                                        MlpParams& grad) {
  const MaskedRays rays = masked_rays(normalized, mask, encoder);
  const auto& d = normalized.dims();
  require_shape(d_embedding, {d[0], d[1], d[2], encoder.out_features()},
                "object_position_embedding_backward dE");
  mlp_backward(encoder, rays.input,
               d_embedding.reshaped({rays.rays, encoder.out_features()}), grad);
}

Tensor resample_to_latent(const Tensor& embedding, std::size_t latent_height,
                          std::size_t latent_width) {
  if (embedding.rank() != 4) {
    throw ShapeError("resample_to_latent: expected (N_c, W_F, H_F, C), got " +
                     shape_string(embedding.dims()));
  }
  if (latent_height == 0 || latent_width == 0) throw ShapeError("resample_to_latent: empty grid");
  const std::size_t cams = embedding.dim(0), wf = embedding.dim(1), hf = embedding.dim(2),
                    c = embedding.dim(3);
  Tensor out({cams, latent_height * latent_width, c});
  for (std::size_t n = 0; n < cams; ++n) {
    for (std::size_t h = 0; h < latent_height; ++h) {
      const std::size_t v = h * hf / latent_height;
      for (std::size_t w = 0; w < latent_width; ++w) {
        const std::size_t u = w * wf / latent_width;
        const double* src = embedding.data() + ((n * wf + u) * hf + v) * c;
        std::copy(src, src + c, out.data() + (n * latent_height * latent_width + h * latent_width + w) * c);
      }
    }
  }
  return out;
}

Tensor augmented_spatial_attention(const Tensor& latents, const Tensor& embedding,
                                   const AttentionParams& attn) {
  if (!latents.same_shape(embedding)) {
    throw ShapeError("augmented_spatial_attention: latents " + shape_string(latents.dims()) +
                     " vs embedding " + shape_string(embedding.dims()));
  }
  return self_attention(attn, add(latents, embedding));
}

AsaGradient augmented_spatial_attention_backward(const Tensor& latents, const Tensor& embedding,
                                                 const AttentionParams& attn, const Tensor& dy) {
  if (!latents.same_shape(embedding)) {
    throw ShapeError("augmented_spatial_attention_backward: latent / embedding shape mismatch");
  }
  AttentionParams grad = zeros_like(attn);
  Tensor dx = self_attention_backward(attn, add(latents, embedding), dy, grad);
  return AsaGradient{dx, dx, std::move(grad.wq)};
}

}  // namespace forge
