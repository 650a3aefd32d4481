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

// Clip sampling with classifier-free guidance, motion-frame chaining,
// overlap blending and the long-video autoregression loop.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "forge/conditions.hpp"
#include "forge/mta.hpp"
#include "forge/scene.hpp"
#include "forge/schedule.hpp"

namespace forge {

/// Per-frame latent extents: (N_c, C, H, W).
struct LatentGeometry {
  std::size_t cameras = 6;
  std::size_t channels = 4;
  std::size_t height = 28;
  std::size_t width = 50;

  Shape frame_shape() const { return {cameras, channels, height, width}; }
  Shape clip_shape(std::size_t frames) const { return {frames, cameras, channels, height, width}; }
  std::size_t frame_size() const { return cameras * channels * height * width; }
};

struct MotionContext {
  Tensor latents;                      // (M, N_c, C, H, W); empty when M = 0
  std::vector<Eigen::Matrix4d> poses;  // M + T relative transforms
  std::size_t count() const { return latents.empty() ? 0 : latents.dim(0); }
};

struct DenoiseInput {
  const Tensor& latents;  // (T, N_c, C, H, W)
  std::size_t step = 0;   // schedule index
  double alpha_bar = 0.0;
  bool conditional = true;
  std::size_t clip = 0;
  std::size_t first_frame = 0;  // global index of latents[0]
  const std::vector<FrameConditions>* conditions = nullptr;  // one per frame, may be null
  const MotionContext* motion = nullptr;
};

/// Noise predictor standing in for the diffusion backbone.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  /// Same shape as `in.latents`; deterministic in its inputs.
  virtual Tensor predict_noise(const DenoiseInput& in) = 0;
  /// False when the predictor ignores per-frame conditions, letting callers
  /// skip building them.
  virtual bool uses_conditions() const { return true; }
};

/// eps = (z - sqrt(a) * target(frame)) / sqrt(1 - a) with a deterministic
/// per-frame target, so every sampler step predicts the target exactly.
class FixedPointDenoiser : public Denoiser {
 public:
  explicit FixedPointDenoiser(LatentGeometry geometry) : geometry_(geometry) {}
  Tensor predict_noise(const DenoiseInput& in) override;
  bool uses_conditions() const override { return false; }

  /// Clean latents the sampler converges to for global frame `frame`.
  static Tensor target(std::size_t frame, const LatentGeometry& geometry);

 private:
  LatentGeometry geometry_;
};

/// Small condition-driven predictor: the conditional target of each frame
/// mixes its canvas features with the projected object-wise embedding, and
/// clip frames are refined jointly with the motion frames through motion-aware
/// temporal attention. The unconditional target is zero.
class ToyDenoiser : public Denoiser {
 public:
  ToyDenoiser(LatentGeometry geometry, std::size_t ope_width, std::uint64_t seed);
  Tensor predict_noise(const DenoiseInput& in) override;

  const MtaParams& mta() const { return mta_; }

 private:
  Tensor clip_target(const DenoiseInput& in);

  LatentGeometry geometry_;
  Linear ope_projection_;  // ope_width -> C
  MtaParams mta_;
  std::map<std::tuple<std::size_t, std::size_t, bool>, Tensor> cache_;
};

/// Predicts the clean latents implied by `eps` at level alpha_bar.
Tensor predict_clean(const Tensor& z, const Tensor& eps, double alpha_bar);

struct ClipRequest {
  std::size_t clip = 0;
  std::size_t first_frame = 0;
  std::size_t frames = 7;  // T
  const std::vector<FrameConditions>* conditions = nullptr;
  MotionContext motion;
  Tensor prev_clean;        // (N, N_c, C, H, W) clean latents of the previous clip
  std::size_t overlap = 0;  // N
  std::size_t steps = 20;
  double cfg_scale = 2.0;
};

/// Deterministic first-order sampler. Starting from seeded unit noise, each
/// step (most noise first) blends the overlap frames, combines an
/// unconditional and a conditional prediction, estimates
/// z0 = (z - sqrt(1 - a) eps) / sqrt(a) and re-noises it to the next level:
/// z = sqrt(a_next) z0 + sqrt(1 - a_next) eps. The last step returns z0.
Tensor denoise_clip(const ClipRequest& req, Denoiser& denoiser, const DiffusionSchedule& sched,
                    std::uint64_t seed, const LatentGeometry& geometry);

struct HistoryFrame {
  std::size_t index = 0;
  Tensor latents;  // (N_c, C, H, W)
  EgoPose pose;
};

enum class MotionSampling { kInference, kTraining };

struct MotionFrames {
  std::vector<std::size_t> indices;
  Tensor latents;                         // (M, N_c, C, H, W)
  std::vector<EgoPose> poses;
  std::vector<Eigen::Matrix4d> relative;  // identity, then frame-to-frame motion
};

/// Inference takes the last M frames; training draws M distinct frames,
/// kept in temporal order, from the trailing five.
MotionFrames sample_motion_frames(std::span<const HistoryFrame> history, std::size_t m,
                                  MotionSampling mode, std::mt19937_64& rng);

struct EmittedFrame {
  std::size_t index = 0;
  std::size_t clip = 0;
  bool overlap = false;  // re-generated as context by the next clip
  const Tensor& latents;
};

using FrameSink = std::function<void(const EmittedFrame&)>;

struct ClipStats {
  std::size_t clip = 0;
  std::size_t first_frame = 0;
  std::size_t frames = 0;
  std::size_t overlap = 0;
  std::size_t emitted_first = 0;
  std::size_t emitted_count = 0;
  double overlap_discontinuity = 0.0;  // max |clip[:N] - previous clip[-N:]|
  std::int64_t peak_live_tensors = 0;
  std::int64_t live_tensors_after = 0;
};

struct GenerateReport {
  std::size_t frames_emitted = 0;
  bool stream_exhausted = false;
  std::vector<ClipStats> clips;  // clips[0] is the single-frame bootstrap
};

struct GenerateOptions {
  RunConfig config;
  std::size_t frames = 0;  // L, total frames to emit
  LatentGeometry geometry;
  const ConditionBuilder* conditions = nullptr;
};

/// Emits frames 0..L-1 once each: a single-frame bootstrap produces frame 0;
/// the first clip covers frames 1..T; every later clip starts N frames before
/// the next unemitted frame, re-generating the previous clip's last N frames
/// as blended context and emitting the remaining T - N. Only the last M + N
/// frames are retained between clips.
GenerateReport generate_long_video(SceneStream& stream, Denoiser& denoiser,
                                   const GenerateOptions& options, const FrameSink& sink);

/// Writes numbered FRGT files plus a JSON-lines manifest
/// {"frame", "file", "clip", "overlap"} into a directory.
class ManifestWriter {
 public:
  explicit ManifestWriter(const std::filesystem::path& dir);
  void operator()(const EmittedFrame& frame);
  std::size_t written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::ofstream manifest_;
  std::size_t written_ = 0;
};

struct ManifestEntry {
  std::size_t frame = 0;
  std::string file;
  std::size_t clip = 0;
  bool overlap = false;
  bool operator==(const ManifestEntry&) const = default;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct MaskShift {
  enum class Branch { kRandom, kAutoregressive };
  Branch branch = Branch::kRandom;
  std::vector<bool> mask;  // true = generate, false = context
};

/// Fair coin between random masking (each position true with p = 0.5) and
/// autoregressive masking ([false] * N + [true] * (T - N)).
MaskShift mask_shift_masks(std::size_t frames, std::size_t overlap, std::mt19937_64& rng);

}  // namespace forge
