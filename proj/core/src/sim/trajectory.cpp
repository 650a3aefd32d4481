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

#include "forge/sim/trajectory.hpp"

#include <cmath>
#include <numbers>

#include "forge/errors.hpp"

namespace forge::sim {

double wrap_heading(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

std::vector<Pose2> interpolate_trajectory(const TrajectoryMsg& plan, const Pose2& current) {
  if (plan.points.size() != kPlanPoints) {
    throw Error("trajectory must hold exactly 6 points, got " + std::to_string(plan.points.size()));
  }
  std::vector<Pose2> knots{current};
  knots.insert(knots.end(), plan.points.begin(), plan.points.end());
  for (const auto& k : knots) {
    if (!std::isfinite(k.x) || !std::isfinite(k.y) || !std::isfinite(k.heading)) {
      throw NumericError("trajectory: non-finite pose");
    }
  }
  constexpr std::size_t kPerSegment = 5;  // 0.5 s / 0.1 s
  std::vector<Pose2> out;
  out.reserve(kDensePoints);
  for (std::size_t j = 0; j < kDensePoints; ++j) {
    const std::size_t seg = std::min(j / kPerSegment, kPlanPoints - 1);
    const double s = static_cast<double>(j - seg * kPerSegment) / kPerSegment;
    const Pose2& a = knots[seg];
    const Pose2& b = knots[seg + 1];
    out.push_back(Pose2{a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s,
                        wrap_heading(a.heading + wrap_heading(b.heading - a.heading) * s)});
  }
  return out;
}

}  // namespace forge::sim
