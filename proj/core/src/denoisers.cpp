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

#include <cmath>

#include "forge/autoreg.hpp"
#include "forge/errors.hpp"

namespace forge {

namespace {

Tensor eps_toward(const Tensor& z, const Tensor& target, double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0)) throw Error("denoiser: alpha_bar must lie in (0, 1)");
  const double a = std::sqrt(alpha_bar), b = std::sqrt(1.0 - alpha_bar);
  Tensor eps(z.dims());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (z[i] - a * target[i]) / b;
  return eps;
}

void require_clip(const Tensor& z, const LatentGeometry& g) {
  if (z.rank() != 5 || Shape(z.dims().begin() + 1, z.dims().end()) != g.frame_shape()) {
    throw ShapeError("denoiser: expected (T, " + std::to_string(g.cameras) + ", " +
                     std::to_string(g.channels) + ", " + std::to_string(g.height) + ", " +
                     std::to_string(g.width) + ") latents, got " + shape_string(z.dims()));
  }
}

}  // namespace

Tensor FixedPointDenoiser::target(std::size_t frame, const LatentGeometry& geometry) {
  Tensor t(geometry.frame_shape());
  const double f = static_cast<double>(frame);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = static_cast<double>(i);
    t[i] = 0.5 * std::sin(0.37 * f + 0.013 * x) + 0.25 * std::cos(0.11 * x);
  }
  return t;
}

Tensor FixedPointDenoiser::predict_noise(const DenoiseInput& in) {
  require_clip(in.latents, geometry_);
  const std::size_t frames = in.latents.dim(0), per = geometry_.frame_size();
  Tensor target(in.latents.dims());
  for (std::size_t k = 0; k < frames; ++k) {
    const Tensor t = FixedPointDenoiser::target(in.first_frame + k, geometry_);
    std::copy(t.values().begin(), t.values().end(), target.data() + k * per);
  }
  return eps_toward(in.latents, target, in.alpha_bar);
}

ToyDenoiser::ToyDenoiser(LatentGeometry geometry, std::size_t ope_width, std::uint64_t seed)
    : geometry_(geometry) {
  std::mt19937_64 rng(seed ^ 0x746f792d64656eull);
  ope_projection_ = Linear::random(ope_width, geometry.channels, rng);
  mta_ = MtaParams::random(geometry.channels, 1, rng);
  // Open both residual branches slightly so motion frames shape the clip.
  for (ZeroConvParams* zc : {&mta_.attn_out, &mta_.motion_out}) {
    zc->map = Linear::random(geometry.channels, geometry.channels, rng);
    zc->map.weight = scale(zc->map.weight, 0.1);
    zc->map.bias.fill(0.0);
  }
}

Tensor ToyDenoiser::clip_target(const DenoiseInput& in) {
  const auto key = std::make_tuple(in.clip, in.first_frame, in.conditional);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  // One clip is sampled at a time; older entries are never revisited.
  std::erase_if(cache_, [&](const auto& kv) { return std::get<0>(kv.first) != in.clip; });

  const std::size_t frames = in.latents.dim(0), cams = geometry_.cameras, c = geometry_.channels,
                    hw = geometry_.height * geometry_.width, per = geometry_.frame_size();
  Tensor target(in.latents.dims());
  if (in.conditional) {
    if (!in.conditions || in.conditions->size() != frames) {
      throw Error("toy denoiser: conditional call without per-frame conditions");
    }
    for (std::size_t k = 0; k < frames; ++k) {
      const FrameConditions& fc = (*in.conditions)[k];
      require_shape(fc.canvas_features, geometry_.frame_shape(), "toy denoiser canvas features");
      require_shape(fc.ope, {cams, hw, ope_projection_.in_features()}, "toy denoiser ope");
      const Tensor proj = linear_forward(ope_projection_, fc.ope);  // (N_c, HW, C)
      for (std::size_t cam = 0; cam < cams; ++cam) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          for (std::size_t p = 0; p < hw; ++p) {
            const std::size_t i = (cam * c + ch) * hw + p;
            target[k * per + i] = std::tanh(fc.canvas_features[i] + proj[(cam * hw + p) * c + ch]);
          }
        }
      }
    }
  }

  if (in.motion && in.motion->count() > 0) {
    const std::size_t m = in.motion->count();
    for (std::size_t cam = 0; cam < cams; ++cam) {
      MotionBlock block{Tensor({hw, m, c}), Tensor({hw, frames, c}), in.motion->poses};
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t p = 0; p < hw; ++p) {
          const std::size_t i = (cam * c + ch) * hw + p;
          for (std::size_t j = 0; j < m; ++j) block.motion[(p * m + j) * c + ch] = in.motion->latents[j * per + i];
          for (std::size_t k = 0; k < frames; ++k) block.latents[(p * frames + k) * c + ch] = target[k * per + i];
        }
      }
      const Tensor refined = mta_forward(block, mta_);
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t p = 0; p < hw; ++p) {
          const std::size_t i = (cam * c + ch) * hw + p;
          for (std::size_t k = 0; k < frames; ++k) target[k * per + i] = refined[(p * frames + k) * c + ch];
        }
      }
    }
  }
  cache_.emplace(key, target);
  return target;
}

Tensor ToyDenoiser::predict_noise(const DenoiseInput& in) {
  require_clip(in.latents, geometry_);
  return eps_toward(in.latents, clip_target(in), in.alpha_bar);
}

}  // namespace forge
