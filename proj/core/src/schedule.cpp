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

#include "forge/schedule.hpp"

#include <cmath>
#include <numbers>

#include "forge/errors.hpp"

namespace forge {

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "cosine") return ScheduleKind::kCosine;
  if (name == "linear") return ScheduleKind::kLinear;
  throw Error("unknown schedule kind '" + name + "' (expected cosine or linear)");
}

double DiffusionSchedule::at(std::size_t t) const {
  if (t >= alpha_bar.size()) {
    throw Error("schedule step " + std::to_string(t) + " out of range [0, " +
                std::to_string(alpha_bar.size()) + ")");
  }
  return alpha_bar[t];
}

DiffusionSchedule make_schedule(std::size_t steps, ScheduleKind kind) {
  if (steps < 2) throw Error("make_schedule: at least 2 steps required");
  DiffusionSchedule s;
  s.kind = kind;
  s.alpha_bar.resize(steps);
  const double last = static_cast<double>(steps - 1);
  for (std::size_t t = 0; t < steps; ++t) {
    const double f = static_cast<double>(t) / last;
    if (kind == ScheduleKind::kCosine) {
      const double lo = 0.01, hi = std::numbers::pi / 2 - 0.01;
      const double c = std::cos(lo + (hi - lo) * f);
      s.alpha_bar[t] = c * c;
    } else {
      s.alpha_bar[t] = 0.9999 + (1e-4 - 0.9999) * f;
    }
  }
  return s;
}

Tensor add_noise_at(const Tensor& z0, double alpha_bar, const Tensor& eps) {
  if (!z0.same_shape(eps)) {
    throw ShapeError("add_noise: z0 " + shape_string(z0.dims()) + " vs eps " +
                     shape_string(eps.dims()));
  }
  if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) throw Error("add_noise: alpha_bar outside [0, 1]");
  const double a = std::sqrt(alpha_bar), b = std::sqrt(1.0 - alpha_bar);
  Tensor out(z0.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * z0[i] + b * eps[i];
  return out;
}

Tensor add_noise(const Tensor& z0, std::size_t t, const Tensor& eps, const DiffusionSchedule& sched) {
  return add_noise_at(z0, sched.at(t), eps);
}

Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double scale) {
  if (!eps_uncond.same_shape(eps_cond)) {
    throw ShapeError("cfg_combine: " + shape_string(eps_uncond.dims()) + " vs " +
                     shape_string(eps_cond.dims()));
  }
  Tensor out(eps_cond.dims());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = eps_uncond[i] + scale * (eps_cond[i] - eps_uncond[i]);
  }
  return out;
}

Tensor overlap_blend(const Tensor& z_t, const Tensor& prev_clean, std::size_t overlap,
                     std::size_t t, const Tensor& eps, const DiffusionSchedule& sched) {
  if (z_t.rank() == 0) throw ShapeError("overlap_blend: empty latents");
  const std::size_t frames = z_t.dim(0);
  if (overlap >= frames) {
    throw Error("overlap_blend: overlap " + std::to_string(overlap) + " must be < clip length " +
                std::to_string(frames));
  }
  Tensor out = z_t;
  if (overlap == 0) return out;
  if (prev_clean.rank() != z_t.rank() || prev_clean.dim(0) != overlap) {
    throw ShapeError("overlap_blend: previous clip latents " + shape_string(prev_clean.dims()) +
                     " do not hold " + std::to_string(overlap) + " frames");
  }
  const Tensor noised = add_noise(prev_clean, t, eps, sched);
  if (noised.size() * frames != z_t.size() * overlap) {
    throw ShapeError("overlap_blend: frame extents differ");
  }
  std::copy(noised.values().begin(), noised.values().end(), out.data());
  return out;
}

std::vector<std::size_t> sampler_timesteps(const DiffusionSchedule& sched, std::size_t steps) {
  if (steps == 0) throw Error("sampler needs at least one step");
  const std::size_t last = sched.size() - 1;
  if (steps == 1) return {last};
  std::vector<std::size_t> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double f = static_cast<double>(steps - 1 - i) / static_cast<double>(steps - 1);
    const auto t = static_cast<std::size_t>(std::llround(f * static_cast<double>(last)));
    if (!out.empty() && t >= out.back()) throw Error("sampler steps exceed schedule length");
    out.push_back(t);
  }
  return out;
}

}  // namespace forge
