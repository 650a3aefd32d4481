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

// Diffusion schedule bookkeeping: cumulative signal fractions, forward
// noising, classifier-free guidance and overlap blending of clip latents.

#include <cstddef>
#include <string>
#include <vector>

#include "forge/tensor.hpp"

namespace forge {

enum class ScheduleKind { kLinear, kCosine };

ScheduleKind parse_schedule_kind(const std::string& name);

/// alpha_bar[t] for t = 0 (least noise) .. size-1 (most noise).
struct DiffusionSchedule {
  ScheduleKind kind = ScheduleKind::kCosine;
  std::vector<double> alpha_bar;

  std::size_t size() const { return alpha_bar.size(); }
  double at(std::size_t t) const;
};

/// cosine: alpha_bar_t = cos^2(a + (b - a) * t / (n - 1)) with a = 0.01, b = pi/2 - 0.01.
/// linear: alpha_bar_t falls linearly from 0.9999 to 1e-4.
DiffusionSchedule make_schedule(std::size_t steps, ScheduleKind kind = ScheduleKind::kCosine);

/// sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * eps.
Tensor add_noise(const Tensor& z0, std::size_t t, const Tensor& eps, const DiffusionSchedule& sched);
Tensor add_noise_at(const Tensor& z0, double alpha_bar, const Tensor& eps);

/// eps_uncond + scale * (eps_cond - eps_uncond).
Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double scale);

/// Replaces the first `overlap` frames (axis 0) of z_t with the previous
/// clip's clean latents noised to level t. Other frames are copied untouched.
Tensor overlap_blend(const Tensor& z_t, const Tensor& prev_clean, std::size_t overlap,
                     std::size_t t, const Tensor& eps, const DiffusionSchedule& sched);

/// Schedule indices visited by a `steps`-step sampler, most noise first and
/// evenly spread over the schedule. Two or more steps end at index 0; a
/// single step visits only the last index.
std::vector<std::size_t> sampler_timesteps(const DiffusionSchedule& sched, std::size_t steps);

}  // namespace forge
