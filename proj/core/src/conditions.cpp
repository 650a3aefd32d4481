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

#include "forge/conditions.hpp"

#include <algorithm>

#include "forge/errors.hpp"

namespace forge {

CameraRig world_rig(const CameraRig& ego_rig, const EgoPose& pose) {
  const Eigen::Matrix3d r = pose.world_from_ego.block<3, 3>(0, 0);
  const Eigen::Vector3d t = pose.world_from_ego.block<3, 1>(0, 3);
  CameraRig out = ego_rig;
  for (auto& cam : out.cameras) {
    cam.rotation = r * cam.rotation;
    cam.translation = r * cam.translation + t;
  }
  return out;
}

Tensor layout_grid(const BevLayout& layout) {
  layout.validate();
  Tensor out({layout.num_classes, layout.rows, layout.cols});
  const std::size_t plane = layout.rows * layout.cols;
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t k = 0; k < layout.num_classes; ++k) {
      if (layout.cells[i] & (1u << k)) out[k * plane + i] = 1.0;
    }
  }
  return out;
}

ConditionBuilder::ConditionBuilder(const Scene& scene, const RunConfig& cfg, std::uint64_t seed)
    : scene_(scene),
      latent_height_(cfg.latent_height()),
      latent_width_(cfg.latent_width()),
      canvas_size_{4 * cfg.latent_height(), 4 * cfg.latent_width()} {
  scene.validate();
  EncoderConfig enc;
  enc.road_classes = scene.road_classes.size();
  enc.box_classes = scene.box_classes.size();
  bank_ = EncoderBank::create(enc, seed);

  ope_cfg_.frustum_width = latent_width_;
  ope_cfg_.frustum_height = latent_height_;
  ope_cfg_.width = enc.width;
  std::mt19937_64 rng(seed ^ 0x6f70652d656e63ull);
  ope_encoder_ = make_ope_encoder(ope_cfg_.depth, ope_cfg_.width, rng);

  // The rig is rigidly attached to the ego vehicle, so ego-frame frustum
  // samples are the same for every frame; only the boxes move.
  frustum_ego_ = frustum_world_points(scene.rig, ope_cfg_.frustum_width, ope_cfg_.frustum_height,
                                      ope_cfg_.depth, ope_cfg_.depth_cfg);
  frustum_normalized_ = normalize_frustum(frustum_ego_, ope_cfg_.roi);

  text_ = text_stub(scene.prompt, enc.width);
  camera_tokens_ = Tensor({scene.rig.size(), enc.width});
  for (std::size_t c = 0; c < scene.rig.size(); ++c) {
    const auto row = encode_camera(scene.rig, c, bank_.camera);
    std::copy(row.begin(), row.end(), camera_tokens_.data() + c * enc.width);
  }
  layout_features_ = encode_grid(layout_grid(scene.layout), bank_.layout);
}

FrameConditions ConditionBuilder::build(const SceneFrame& frame) const {
  frame.ego.validate();
  FrameConditions out;
  const std::size_t width = bank_.config.width;

  std::vector<Box3D> ego_boxes;
  ego_boxes.reserve(frame.boxes.size());
  for (const auto& b : frame.boxes) ego_boxes.push_back(box_to_ego(b, frame.ego));

  out.embeddings.text = text_;
  out.embeddings.camera = camera_tokens_;
  if (!ego_boxes.empty()) {
    out.embeddings.box = Tensor({ego_boxes.size(), width});
    for (std::size_t i = 0; i < ego_boxes.size(); ++i) {
      const auto row = encode_box(ego_boxes[i], bank_.box);
      std::copy(row.begin(), row.end(), out.embeddings.box.data() + i * width);
    }
  }
  out.embeddings.layout = layout_features_;

  out.canvas = perspective_canvas(scene_.layout, frame.boxes, world_rig(scene_.rig, frame.ego),
                                  canvas_size_, scene_.box_classes.size());
  const std::size_t cams = scene_.rig.size();
  for (std::size_t c = 0; c < cams; ++c) {
    const Tensor one = slice_leading(out.canvas, c, 1).reshaped(
        {out.canvas.dim(1), out.canvas.dim(2), out.canvas.dim(3)});
    const Tensor feat = encode_grid(one, bank_.canvas);
    if (c == 0) {
      out.canvas_features = Tensor({cams, feat.dim(0), feat.dim(1), feat.dim(2)});
    }
    std::copy(feat.values().begin(), feat.values().end(),
              out.canvas_features.data() + c * feat.size());
  }
  out.embeddings.canvas = out.canvas_features;

  const FrustumMask3D mask = build_3d_mask(frustum_ego_, ego_boxes);
  out.ope = resample_to_latent(object_position_embedding(frustum_normalized_, mask, ope_encoder_),
                               latent_height_, latent_width_);
  return out;
}

}  // namespace forge
