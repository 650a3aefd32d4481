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

#include <vector>

#include "forge/sim/protocol.hpp"

namespace forge::sim {

inline constexpr std::size_t kPlanPoints = 6;
inline constexpr double kPlanSpacing = 0.5;  // seconds between plan points
inline constexpr double kTickSeconds = 0.1;
inline constexpr std::size_t kDensePoints = 31;  // 0.0 .. 3.0 s at 10 Hz

/// (-pi, pi]
double wrap_heading(double a);

/// Piecewise-linear densification of a 2 Hz plan to 10 Hz. Knots are the
/// current pose at t = 0 and the plan points at 0.5, 1.0, ..., 3.0 s;
/// headings follow the shortest arc. Returns 31 poses; pose j is at 0.1 j s.
std::vector<Pose2> interpolate_trajectory(const TrajectoryMsg& plan, const Pose2& current);

}  // namespace forge::sim
