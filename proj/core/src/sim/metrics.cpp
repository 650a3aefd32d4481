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

#include "forge/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forge/errors.hpp"

namespace forge::sim {

DrivableMask DrivableMask::from_rects(Eigen::Vector2d origin, double resolution, std::size_t rows,
                                      std::size_t cols, const std::vector<Eigen::Vector4d>& rects) {
  if (!(resolution > 0.0) || rows == 0 || cols == 0) throw Error("drivable mask: empty grid");
  DrivableMask m{origin, resolution, rows, cols, std::vector<std::uint8_t>(rows * cols, 0)};
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = origin.y() + (static_cast<double>(r) + 0.5) * resolution;
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = origin.x() + (static_cast<double>(c) + 0.5) * resolution;
      for (const auto& q : rects) {
        if (x >= q[0] && x <= q[2] && y >= q[1] && y <= q[3]) {
          m.cells[r * cols + c] = 1;
          break;
        }
      }
    }
  }
  return m;
}

bool DrivableMask::contains(double x, double y) const {
  const double fc = std::floor((x - origin.x()) / resolution);
  const double fr = std::floor((y - origin.y()) / resolution);
  if (!(fc >= 0.0 && fr >= 0.0 && fc < static_cast<double>(cols) && fr < static_cast<double>(rows))) {
    return false;
  }
  return cells[static_cast<std::size_t>(fr) * cols + static_cast<std::size_t>(fc)] != 0;
}

double Route::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += (points[i] - points[i - 1]).norm();
  return total;
}

double Route::project(const Eigen::Vector2d& p) const {
  if (points.size() < 2) throw Error("route needs at least two points");
  double best = std::numeric_limits<double>::infinity(), best_s = 0.0, s = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Eigen::Vector2d seg = points[i] - points[i - 1];
    const double len2 = seg.squaredNorm();
    const double u = len2 > 0.0 ? std::clamp((p - points[i - 1]).dot(seg) / len2, 0.0, 1.0) : 0.0;
    const double d = (points[i - 1] + u * seg - p).squaredNorm();
    if (d < best) {
      best = d;
      best_s = s + u * std::sqrt(len2);
    }
    s += std::sqrt(len2);
  }
  return best_s;
}

Pose2 Route::at(double s) const {
  if (points.size() < 2) throw Error("route needs at least two points");
  s = std::max(0.0, s);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Eigen::Vector2d seg = points[i] - points[i - 1];
    const double len = seg.norm();
    if (s <= len || i + 1 == points.size()) {
      const double u = len > 0.0 ? std::min(s, len) / len : 0.0;
      const Eigen::Vector2d p = points[i - 1] + u * seg;
      return Pose2{p.x(), p.y(), std::atan2(seg.y(), seg.x())};
    }
    s -= len;
  }
  return {};
}

double pdms_aggregate(const PdmsReport& sub, const PdmsWeights& w) {
  const double total = w.progress + w.ttc + w.comfort;
  if (!(total > 0.0)) throw Error("pdms weights must sum to a positive value");
  return sub.nc * sub.dac * (w.progress * sub.ep + w.ttc * sub.ttc + w.comfort * sub.comfort) / total;
}

double time_to_collision(const Eigen::Vector2d& rel_pos, const Eigen::Vector2d& rel_vel,
                         double combined_radius) {
  const double r2 = combined_radius * combined_radius;
  const double c = rel_pos.squaredNorm() - r2;
  if (c < 0.0) return 0.0;
  const double a = rel_vel.squaredNorm();
  const double b = rel_pos.dot(rel_vel);
  if (a == 0.0 || b >= 0.0) return std::numeric_limits<double>::infinity();
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  return (-b - std::sqrt(disc)) / a;
}

namespace {

Eigen::Vector2d xy(const Pose2& p) { return {p.x, p.y}; }

std::vector<Eigen::Vector2d> velocities(std::span<const Pose2> track, double dt) {
  std::vector<Eigen::Vector2d> v;
  for (std::size_t i = 1; i < track.size(); ++i) v.push_back((xy(track[i]) - xy(track[i - 1])) / dt);
  return v;
}

Eigen::Vector2d velocity_at(const std::vector<Eigen::Vector2d>& v, std::size_t i) {
  if (v.empty()) return Eigen::Vector2d::Zero();
  return v[std::min(i, v.size() - 1)];
}

}  // namespace

PdmsReport pdms(std::span<const Pose2> ego, std::span<const AgentTrack> agents,
                const DrivableMask& drivable, const Route& route, const PdmsConfig& cfg) {
  if (ego.empty()) throw Error("pdms: empty ego track");
  if (!(cfg.dt > 0.0)) throw Error("pdms: dt must be positive");
  if (!(cfg.reference_progress > 0.0)) throw Error("pdms: reference progress must be positive");
  for (const auto& a : agents) {
    if (a.poses.size() != ego.size()) throw Error("pdms: agent track not aligned with ego track");
  }
  PdmsReport r;
  const auto ego_v = velocities(ego, cfg.dt);
  double min_ttc = std::numeric_limits<double>::infinity();
  for (const auto& a : agents) {
    const auto agent_v = velocities(a.poses, cfg.dt);
    const double reach = cfg.ego_radius + a.radius;
    for (std::size_t i = 0; i < ego.size(); ++i) {
      const Eigen::Vector2d d = xy(a.poses[i]) - xy(ego[i]);
      if (d.norm() < reach) r.nc = 0.0;
      min_ttc = std::min(min_ttc, time_to_collision(d, velocity_at(agent_v, i) - velocity_at(ego_v, i), reach));
    }
  }
  for (const auto& p : ego) {
    if (!drivable.contains(p.x, p.y)) r.dac = 0.0;
  }
  const double progress = route.project(xy(ego.back())) - route.project(xy(ego.front()));
  r.ep = std::clamp(progress / cfg.reference_progress, 0.0, 1.0);
  r.ttc = min_ttc >= cfg.ttc_threshold ? 1.0 : 0.0;

  std::vector<Eigen::Vector2d> acc;
  for (std::size_t i = 1; i < ego_v.size(); ++i) acc.push_back((ego_v[i] - ego_v[i - 1]) / cfg.dt);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i].norm() > cfg.max_accel) r.comfort = 0.0;
    if (i > 0 && ((acc[i] - acc[i - 1]) / cfg.dt).norm() > cfg.max_jerk) r.comfort = 0.0;
  }
  r.score = pdms_aggregate(r, cfg.weights);
  return r;
}

double ads(std::span<const double> segment_pdms, double route_completion) {
  if (segment_pdms.empty()) throw Error("ads: no segment scores");
  if (!(route_completion >= 0.0 && route_completion <= 1.0)) {
    throw Error("ads: route completion outside [0, 1]");
  }
  double total = 0.0;
  for (double s : segment_pdms) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error("ads: segment score outside [0, 1]");
    total += s;
  }
  return total / static_cast<double>(segment_pdms.size()) * route_completion;
}

}  // namespace forge::sim
