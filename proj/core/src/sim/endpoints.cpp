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

#include "forge/sim/endpoints.hpp"

#include <algorithm>
#include <cmath>

#include "forge/errors.hpp"
#include "forge/frgt.hpp"
#include "forge/sim/trajectory.hpp"

namespace forge::sim {

std::optional<std::string> run_endpoint(Endpoint& endpoint, Link& link,
                                        std::chrono::milliseconds idle_timeout) {
  SequenceGuard guard(endpoint.name() + " inbound");
  try {
    while (true) {
      const WireMessage request = link.receive(idle_timeout);
      guard.check(request);
      if (request.type == MessageType::kShutdown) return std::nullopt;
      if (auto reply = endpoint.handle(request)) link.send(*reply);
    }
  } catch (const std::exception& e) {
    return endpoint.name() + ": " + e.what();
  }
}

Eigen::Matrix4d pose2_to_matrix(const Pose2& p) {
  return make_pose(yaw_rotation(p.heading), Eigen::Vector3d(p.x, p.y, 0.0));
}

namespace {

void expect(const WireMessage& m, MessageType type, const std::string& who) {
  if (m.type != type) {
    throw ProtocolError(who + ": unexpected '" + std::string(type_tag(m.type)) + "' message");
  }
}

}  // namespace

// ---------------------------------------------------------------- traffic

std::optional<WireMessage> TrafficEndpoint::handle(const WireMessage& request) {
  expect(request, MessageType::kTick, name());
  const TickRequest req = tick_request_from_payload(request.payload);
  const double dt = kTickSeconds;
  SimFrame f;
  f.tick = req.tick;
  f.time = static_cast<double>(req.tick) * dt;
  if (req.control) {
    f.ego_speed = ego_ ? std::hypot(req.control->x - ego_->x, req.control->y - ego_->y) / dt : 0.0;
    ego_ = req.control;
    route_s_ = scenario_.route.project({ego_->x, ego_->y});
  } else {
    if (ego_) route_s_ += scenario_.ego_speed * dt;
    ego_ = scenario_.route.at(route_s_);
    f.ego_speed = scenario_.ego_speed;
  }
  f.ego = *ego_;
  for (const auto& a : scenario_.agents) f.agents.push_back(a.at_tick(req.tick));
  return make_message(MessageType::kTick, next_seq(), to_payload(f));
}

// ---------------------------------------------------------------- dreamer

DreamerEndpoint::DreamerEndpoint(DreamerConfig cfg)
    : cfg_(cfg), denoiser_(cfg.geometry), schedule_(make_schedule(cfg.schedule_length)) {}

std::optional<WireMessage> DreamerEndpoint::handle(const WireMessage& request) {
  expect(request, MessageType::kWindow, name());
  const SimWindow window = window_from_payload(request.payload);
  const std::size_t t_len = window.frames.size();
  if (t_len == 0) throw ProtocolError("dreamer: empty window");

  ClipRequest req;
  req.clip = static_cast<std::size_t>(window.start);
  req.first_frame = static_cast<std::size_t>(window.start);
  req.frames = t_len;
  req.steps = cfg_.steps;
  req.cfg_scale = 2.0;

  const std::size_t n = cfg_.overlap, m = cfg_.motion_frames;
  const bool chained = prev_window_ && prev_window_->frames.size() == t_len &&
                       window.start == prev_window_->start + static_cast<std::int64_t>(t_len - n) &&
                       t_len >= n + m;
  if (chained) {
    req.overlap = n;
    req.prev_clean = slice_leading(prev_clip_, t_len - n, n);
    if (m > 0) {
      req.motion.latents = slice_leading(prev_clip_, t_len - n - m, m);
      std::vector<EgoPose> poses;
      for (std::size_t i = t_len - n - m; i < t_len - n; ++i) {
        poses.push_back(EgoPose{pose2_to_matrix(prev_window_->frames[i].ego), prev_window_->frames[i].time});
      }
      for (const auto& f : window.frames) poses.push_back(EgoPose{pose2_to_matrix(f.ego), f.time});
      req.motion.poses = relative_pose_chain(poses);
    }
  }
  const Tensor clip = denoise_clip(req, denoiser_, schedule_, cfg_.seed + req.clip, cfg_.geometry);
  last_discontinuity_ = chained ? max_abs_diff(slice_leading(clip, 0, n), req.prev_clean) : 0.0;
  prev_clip_ = clip;
  prev_window_ = window;

  const Tensor key = slice_leading(clip, t_len - 1, 1).reshaped(cfg_.geometry.frame_shape());
  const KeyframeImages out{window.frames.back(), base64_encode(encode_frgt(key))};
  return make_message(MessageType::kKeyframeImages, next_seq(), to_payload(out));
}

// ---------------------------------------------------------------- agent

TrajectoryMsg AgentEndpoint::plan(const SimFrame& key) const {
  const Route& route = scenario_.route;
  const double s0 = route.project({key.ego.x, key.ego.y});
  const double v0 = key.ego_speed;
  const double cruise = scenario_.ego_speed;
  constexpr double kAccel = 2.0, kBrake = 3.0, kMargin = 1.0;

  const auto distance = [&](double t, bool braking) {
    if (braking) {
      const double stop = v0 / kBrake;
      const double tt = std::min(t, stop);
      return v0 * tt - 0.5 * kBrake * tt * tt;
    }
    const double reach = std::abs(cruise - v0) / kAccel;
    const double sign = cruise >= v0 ? 1.0 : -1.0;
    const double tt = std::min(t, reach);
    return v0 * tt + 0.5 * sign * kAccel * tt * tt + cruise * (t - tt);
  };
  const auto conflict = [&](bool braking) {
    for (std::size_t k = 1; k <= 30; ++k) {
      const double t = 0.1 * static_cast<double>(k);
      const Pose2 p = route.at(s0 + distance(t, braking));
      for (const auto& a : key.agents) {
        const double ax = a.pose.x + a.speed * t * std::cos(a.pose.heading);
        const double ay = a.pose.y + a.speed * t * std::sin(a.pose.heading);
        if (std::hypot(p.x - ax, p.y - ay) < ego_radius_ + a.radius + kMargin) return true;
      }
    }
    return false;
  };
  const bool braking = conflict(false);

  TrajectoryMsg out;
  out.source_tick = key.tick;
  out.issue_time = key.time;
  for (std::size_t k = 1; k <= kPlanPoints; ++k) {
    out.points.push_back(route.at(s0 + distance(kPlanSpacing * static_cast<double>(k), braking)));
  }
  return out;
}

std::optional<WireMessage> AgentEndpoint::handle(const WireMessage& request) {
  expect(request, MessageType::kKeyframeImages, name());
  const KeyframeImages key = keyframe_from_payload(request.payload);
  const auto bytes = base64_decode(key.latents_b64);
  decode_frgt(bytes);  // the scripted planner ignores pixels but rejects corrupt payloads
  return make_message(MessageType::kTrajectory, next_seq(), to_payload(plan(key.frame)));
}

}  // namespace forge::sim
