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

// Planning scores: PDMS sub-scores over a 10 Hz episode segment and the
// route-completion-weighted ADS.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "forge/sim/protocol.hpp"

namespace forge::sim {

/// Boolean drivable grid; cell (r, c) covers
/// [origin.x + c * res, +res) x [origin.y + r * res, +res).
struct DrivableMask {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double resolution = 1.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> cells;

  /// Rectangles [xmin, ymin, xmax, ymax]; a cell is drivable when its center
  /// lies inside one of them.
  static DrivableMask from_rects(Eigen::Vector2d origin, double resolution, std::size_t rows,
                                 std::size_t cols, const std::vector<Eigen::Vector4d>& rects);
  bool contains(double x, double y) const;
};

/// Route polyline with arc-length projection.
struct Route {
  std::vector<Eigen::Vector2d> points;

  double length() const;
  /// Arc length of the closest point on the polyline.
  double project(const Eigen::Vector2d& p) const;
  /// Position and tangent heading at arc length s (clamped to the route).
  Pose2 at(double s) const;
};

struct PdmsWeights {
  double progress = 5.0;
  double ttc = 5.0;
  double comfort = 2.0;
};

struct PdmsConfig {
  PdmsWeights weights;
  double ego_radius = 1.5;
  double ttc_threshold = 1.0;  // seconds
  double max_accel = 4.0;      // m/s^2
  double max_jerk = 8.0;       // m/s^3
  double dt = 0.1;
  double reference_progress = 1.0;  // meters that earn EP = 1
};

struct PdmsReport {
  double nc = 1.0;
  double dac = 1.0;
  double ep = 1.0;
  double ttc = 1.0;
  double comfort = 1.0;
  double score = 1.0;
};

/// NC * DAC * (w_EP EP + w_TTC TTC + w_C C) / (w_EP + w_TTC + w_C).
double pdms_aggregate(const PdmsReport& sub, const PdmsWeights& w);

struct AgentTrack {
  std::vector<Pose2> poses;  // time-aligned with the ego track
  double radius = 1.0;
};

/// Smallest t >= 0 at which two discs moving with constant velocity touch;
/// 0 when they already overlap, +inf when they never meet.
double time_to_collision(const Eigen::Vector2d& rel_pos, const Eigen::Vector2d& rel_vel,
                         double combined_radius);

PdmsReport pdms(std::span<const Pose2> ego, std::span<const AgentTrack> agents,
                const DrivableMask& drivable, const Route& route, const PdmsConfig& cfg);

/// mean(segment PDMS) * route completion.
double ads(std::span<const double> segment_pdms, double route_completion);

}  // namespace forge::sim
