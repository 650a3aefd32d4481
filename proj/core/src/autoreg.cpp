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

#include "forge/autoreg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/frgt.hpp"

namespace forge {

Tensor predict_clean(const Tensor& z, const Tensor& eps, double alpha_bar) {
  if (!z.same_shape(eps)) throw ShapeError("predict_clean: latent / noise shape mismatch");
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) throw Error("predict_clean: alpha_bar outside (0, 1]");
  const double a = std::sqrt(alpha_bar), b = std::sqrt(1.0 - alpha_bar);
  Tensor out(z.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (z[i] - b * eps[i]) / a;
  return out;
}

namespace {

Tensor call_denoiser(Denoiser& d, const DenoiseInput& in) {
  Tensor eps = d.predict_noise(in);
  if (!eps.same_shape(in.latents)) {
    throw ShapeError("denoiser returned " + shape_string(eps.dims()) + " for latents " +
                     shape_string(in.latents.dims()));
  }
  return eps;
}

}  // namespace

Tensor denoise_clip(const ClipRequest& req, Denoiser& denoiser, const DiffusionSchedule& sched,
                    std::uint64_t seed, const LatentGeometry& geometry) {
  if (req.frames == 0) throw Error("denoise_clip: clip needs at least one frame");
  if (req.overlap >= req.frames) throw Error("denoise_clip: overlap must be < clip length");
  const Shape clip_shape = geometry.clip_shape(req.frames);
  if (req.overlap > 0) require_shape(req.prev_clean, geometry.clip_shape(req.overlap), "previous clip latents");
  if (req.conditions && req.conditions->size() != req.frames) {
    throw Error("denoise_clip: expected one condition set per frame");
  }
  if (req.motion.count() > 0) {
    require_shape(req.motion.latents, geometry.clip_shape(req.motion.count()), "motion latents");
    if (req.motion.poses.size() != req.motion.count() + req.frames) {
      throw Error("denoise_clip: expected M + T relative poses");
    }
  }

  std::mt19937_64 rng(seed);
  Tensor z = Tensor::randn(clip_shape, rng);
  const auto steps = sampler_timesteps(sched, req.steps);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::size_t t = steps[i];
    const double a = sched.at(t);
    if (req.overlap > 0) {
      const Tensor eps = Tensor::randn(req.prev_clean.dims(), rng);
      z = overlap_blend(z, req.prev_clean, req.overlap, t, eps, sched);
    }
    DenoiseInput in{z, t, a, false, req.clip, req.first_frame, req.conditions, &req.motion};
    const Tensor eps_u = call_denoiser(denoiser, in);
    in.conditional = true;
    const Tensor eps_c = call_denoiser(denoiser, in);
    const Tensor eps = cfg_combine(eps_u, eps_c, req.cfg_scale);
    Tensor z0 = predict_clean(z, eps, a);
    if (!all_finite(z0.values())) throw NumericError("denoise_clip: non-finite latents");
    if (i + 1 == steps.size()) return z0;
    z = add_noise_at(z0, sched.at(steps[i + 1]), eps);
  }
  return z;  // unreachable: steps is never empty
}

namespace {

Tensor stack_frames(const std::vector<const Tensor*>& frames) {
  const Shape& f = frames.front()->dims();
  Shape dims{frames.size()};
  dims.insert(dims.end(), f.begin(), f.end());
  Tensor out(dims);
  const std::size_t n = frames.front()->size();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i]->dims() != f) throw ShapeError("stack_frames: frame extents differ");
    std::copy_n(frames[i]->data(), n, out.data() + i * n);
  }
  return out;
}

}  // namespace

MotionFrames sample_motion_frames(std::span<const HistoryFrame> history, std::size_t m,
                                  MotionSampling mode, std::mt19937_64& rng) {
  if (m == 0) throw Error("sample_motion_frames: M must be >= 1");
  if (history.size() < m) {
    throw Error("sample_motion_frames: history of " + std::to_string(history.size()) +
                " frames cannot supply " + std::to_string(m) + " motion frames");
  }
  std::vector<std::size_t> picks;
  if (mode == MotionSampling::kInference) {
    for (std::size_t i = history.size() - m; i < history.size(); ++i) picks.push_back(i);
  } else {
    const std::size_t window = std::min<std::size_t>(5, history.size());
    std::vector<std::size_t> pool(window);
    std::iota(pool.begin(), pool.end(), history.size() - window);
    std::sample(pool.begin(), pool.end(), std::back_inserter(picks), m, rng);
    std::sort(picks.begin(), picks.end());
  }
  MotionFrames out;
  std::vector<const Tensor*> frames;
  for (std::size_t p : picks) {
    out.indices.push_back(history[p].index);
    out.poses.push_back(history[p].pose);
    frames.push_back(&history[p].latents);
  }
  out.latents = stack_frames(frames);
  out.relative = relative_pose_chain(out.poses);
  return out;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t clip) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (clip + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Tensor frame_of(const Tensor& clip, std::size_t i) {
  Shape dims(clip.dims().begin() + 1, clip.dims().end());
  return slice_leading(clip, i, 1).reshaped(dims);
}

}  // namespace

GenerateReport generate_long_video(SceneStream& stream, Denoiser& denoiser,
                                   const GenerateOptions& options, const FrameSink& sink) {
  const RunConfig& cfg = options.config;
  cfg.validate();
  const LatentGeometry& geo = options.geometry;
  const std::size_t total = options.frames;
  const std::size_t t_len = cfg.clip_length, m = cfg.motion_frames, n = cfg.overlap;
  const bool build_conditions = denoiser.uses_conditions() && options.conditions != nullptr;
  const DiffusionSchedule sched = make_schedule(cfg.schedule_length, cfg.schedule);
  std::mt19937_64 motion_rng(cfg.seed);

  GenerateReport report;
  std::deque<HistoryFrame> history;
  const std::size_t keep = std::max<std::size_t>(1, m + n);

  const auto emit = [&](const Tensor& clip, std::size_t first, std::size_t from, std::size_t to,
                        std::size_t clip_id, const std::vector<SceneFrame>& frames) {
    for (std::size_t g = from; g < to; ++g) {
      const Tensor latents = frame_of(clip, g - first);
      sink(EmittedFrame{g, clip_id, g + n >= first + t_len && n > 0, latents});
      history.push_back(HistoryFrame{g, latents, frames[g - first].ego});
      if (history.size() > keep) history.pop_front();
      ++report.frames_emitted;
    }
  };

  if (total == 0) return report;

  // Single-frame bootstrap: T = 1, no motion frames, no overlap.
  {
    Tensor::reset_peak();
    auto f0 = stream.frame(0);
    if (!f0) {
      report.stream_exhausted = true;
      return report;
    }
    std::vector<SceneFrame> frames{*f0};
    std::vector<FrameConditions> conds;
    if (build_conditions) conds.push_back(options.conditions->build(*f0));
    ClipRequest req;
    req.clip = 0;
    req.first_frame = 0;
    req.frames = 1;
    req.conditions = build_conditions ? &conds : nullptr;
    req.steps = cfg.steps;
    req.cfg_scale = cfg.cfg_scale;
    const Tensor clip = denoise_clip(req, denoiser, sched, mix_seed(cfg.seed, 0), geo);
    emit(clip, 0, 0, 1, 0, frames);
    report.clips.push_back(ClipStats{0, 0, 1, 0, 0, 1, 0.0, Tensor::peak_count(), 0});
  }
  report.clips.back().live_tensors_after = Tensor::live_count();

  std::size_t next = 1;
  for (std::size_t clip_id = 1; next < total; ++clip_id) {
    Tensor::reset_peak();
    const std::size_t overlap = clip_id == 1 ? 0 : n;
    const std::size_t start = next - overlap;

    std::vector<SceneFrame> frames;
    for (std::size_t i = 0; i < t_len; ++i) {
      auto f = stream.frame(start + i);
      if (!f) break;
      frames.push_back(std::move(*f));
    }
    if (frames.size() < t_len) {
      report.stream_exhausted = true;
      break;
    }

    ClipRequest req;
    req.clip = clip_id;
    req.first_frame = start;
    req.frames = t_len;
    req.overlap = overlap;
    req.steps = cfg.steps;
    req.cfg_scale = cfg.cfg_scale;

    // Motion frames precede the clip; overlapped frames are context, not motion.
    std::vector<HistoryFrame> before;
    for (const auto& h : history) {
      if (h.index < start) before.push_back(h);
    }
    if (m > 0) {
      while (before.size() < m) before.insert(before.begin(), before.front());
      MotionFrames motion = sample_motion_frames(before, m, MotionSampling::kInference, motion_rng);
      std::vector<EgoPose> poses = motion.poses;
      for (const auto& f : frames) poses.push_back(f.ego);
      req.motion.latents = std::move(motion.latents);
      req.motion.poses = relative_pose_chain(poses);
    }
    if (overlap > 0) {
      std::vector<const Tensor*> prev;
      for (const auto& h : history) {
        if (h.index >= start) prev.push_back(&h.latents);
      }
      if (prev.size() != overlap) throw Error("generate_long_video: overlap history missing");
      req.prev_clean = stack_frames(prev);
    }

    std::vector<FrameConditions> conds;
    if (build_conditions) {
      for (const auto& f : frames) conds.push_back(options.conditions->build(f));
      req.conditions = &conds;
    }

    const Tensor clip = denoise_clip(req, denoiser, sched, mix_seed(cfg.seed, clip_id), geo);

    ClipStats stats;
    stats.clip = clip_id;
    stats.first_frame = start;
    stats.frames = t_len;
    stats.overlap = overlap;
    if (overlap > 0) {
      stats.overlap_discontinuity = max_abs_diff(slice_leading(clip, 0, overlap), req.prev_clean);
    }
    const std::size_t end = std::min(start + t_len, total);
    stats.emitted_first = next;
    stats.emitted_count = end - next;
    emit(clip, start, next, end, clip_id, frames);
    next = end;
    stats.peak_live_tensors = Tensor::peak_count();
    report.clips.push_back(stats);
    report.clips.back().live_tensors_after = Tensor::live_count();
  }
  return report;
}

// ---------------------------------------------------------------- manifest

ManifestWriter::ManifestWriter(const std::filesystem::path& dir) : dir_(dir) {
  std::filesystem::create_directories(dir);
  manifest_.open(dir / "manifest.jsonl");
  if (!manifest_) throw Error("cannot write manifest in " + dir.string());
}

void ManifestWriter::operator()(const EmittedFrame& frame) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06zu.frgt", frame.index);
  save_frgt(dir_ / name, frame.latents);
  nlohmann::json line{{"frame", frame.index},
                      {"file", name},
                      {"clip", frame.clip},
                      {"overlap", frame.overlap}};
  manifest_ << line.dump() << '\n';
  manifest_.flush();
  ++written_;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  for (std::size_t no = 1; std::getline(is, line); ++no) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(ManifestEntry{j.at("frame").get<std::size_t>(), j.at("file").get<std::string>(),
                                  j.at("clip").get<std::size_t>(), j.at("overlap").get<bool>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- mask shift

MaskShift mask_shift_masks(std::size_t frames, std::size_t overlap, std::mt19937_64& rng) {
  if (overlap == 0 || overlap >= frames) {
    throw Error("mask_shift_masks: need 0 < N < T, got N = " + std::to_string(overlap) +
                ", T = " + std::to_string(frames));
  }
  std::bernoulli_distribution coin(0.5);
  MaskShift out;
  out.mask.resize(frames);
  if (coin(rng)) {
    out.branch = MaskShift::Branch::kAutoregressive;
    for (std::size_t i = 0; i < frames; ++i) out.mask[i] = i >= overlap;
  } else {
    out.branch = MaskShift::Branch::kRandom;
    for (std::size_t i = 0; i < frames; ++i) out.mask[i] = coin(rng);
  }
  return out;
}

}  // namespace forge
