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

// Per-frame conditioning: perspective canvases, object-wise position
// embeddings and condition tokens for one scene frame.

#include <cstddef>
#include <cstdint>

#include "forge/canvas.hpp"
#include "forge/encoders.hpp"
#include "forge/ope.hpp"
#include "forge/scene.hpp"

namespace forge {

struct FrameConditions {
  ConditionEmbeddings embeddings;
  Tensor canvas;           // (N_c, C_road + C_box, 4H, 4W)
  Tensor canvas_features;  // (N_c, grid_out, H, W)
  Tensor ope;              // (N_c, H * W, C)
};

/// Rig expressed in the world frame for one ego pose.
CameraRig world_rig(const CameraRig& ego_rig, const EgoPose& pose);

/// One-hot BEV grid (C_road, rows, cols) of a layout.
Tensor layout_grid(const BevLayout& layout);

class ConditionBuilder {
 public:
  ConditionBuilder(const Scene& scene, const RunConfig& cfg, std::uint64_t seed);

  FrameConditions build(const SceneFrame& frame) const;

  std::size_t latent_height() const { return latent_height_; }
  std::size_t latent_width() const { return latent_width_; }
  std::size_t cameras() const { return scene_.rig.size(); }
  const EncoderBank& bank() const { return bank_; }
  const MlpParams& ope_encoder() const { return ope_encoder_; }

 private:
  const Scene& scene_;
  std::size_t latent_height_, latent_width_;
  CanvasSize canvas_size_;
  EncoderBank bank_;
  OpeConfig ope_cfg_;
  MlpParams ope_encoder_;
  Tensor frustum_ego_;        // (N_c, W_F, H_F, D, 3), ego frame
  Tensor frustum_normalized_;  // (N_c, W_F, H_F, D * 3)
  Tensor text_, camera_tokens_, layout_features_;
};

}  // namespace forge
