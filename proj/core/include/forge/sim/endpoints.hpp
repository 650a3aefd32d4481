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

// Simulation endpoints. Each endpoint is a sequential actor: it receives one
// message, handles it and replies on the same link.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

#include "forge/autoreg.hpp"
#include "forge/sim/protocol.hpp"
#include "forge/sim/scenario.hpp"
#include "forge/sim/transport.hpp"

namespace forge::sim {

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual std::string name() const = 0;
  /// Reply payload for a request, or nullopt to stay silent.
  virtual std::optional<WireMessage> handle(const WireMessage& request) = 0;

 protected:
  std::uint64_t next_seq() { return ++seq_; }

 private:
  std::uint64_t seq_ = 0;
};

/// Serves requests until a shutdown message arrives, the link closes or the
/// idle timeout expires. Returns the error text that stopped it, if any.
std::optional<std::string> run_endpoint(Endpoint& endpoint, Link& link,
                                        std::chrono::milliseconds idle_timeout);

/// 10 Hz traffic manager: scripted agents plus the ego vehicle, which either
/// follows the route at cruise speed or takes the pose supplied with a tick.
class TrafficEndpoint : public Endpoint {
 public:
  explicit TrafficEndpoint(const Scenario& scenario) : scenario_(scenario) {}
  std::string name() const override { return "traffic"; }
  std::optional<WireMessage> handle(const WireMessage& request) override;

 private:
  const Scenario& scenario_;
  std::optional<Pose2> ego_;
  double route_s_ = 0.0;
};

struct DreamerConfig {
  LatentGeometry geometry{6, 4, 14, 25};
  std::size_t steps = 4;
  std::size_t overlap = 2;
  std::size_t motion_frames = 2;
  std::size_t schedule_length = 1000;
  std::uint64_t seed = 0;
};

/// Window consumer: samples the 7-frame clip with the fixed-point denoiser,
/// blending the 2 frames shared with the previous window, and returns the
/// keyframe latents.
class DreamerEndpoint : public Endpoint {
 public:
  explicit DreamerEndpoint(DreamerConfig cfg);
  std::string name() const override { return "dreamer"; }
  std::optional<WireMessage> handle(const WireMessage& request) override;

  /// max |blended frames - previous window's frames| of the last window.
  double last_overlap_discontinuity() const { return last_discontinuity_; }

 private:
  DreamerConfig cfg_;
  FixedPointDenoiser denoiser_;
  DiffusionSchedule schedule_;
  std::optional<SimWindow> prev_window_;
  Tensor prev_clip_;
  double last_discontinuity_ = 0.0;
};

/// Scripted rule-based planner: follows the route at cruise speed and brakes
/// when a constant-velocity agent would come within reach of the plan.
class AgentEndpoint : public Endpoint {
 public:
  explicit AgentEndpoint(const Scenario& scenario, double ego_radius = 1.5)
      : scenario_(scenario), ego_radius_(ego_radius) {}
  std::string name() const override { return "agent"; }
  std::optional<WireMessage> handle(const WireMessage& request) override;

  /// The plan itself, independent of the wire format.
  TrajectoryMsg plan(const SimFrame& keyframe) const;

 private:
  const Scenario& scenario_;
  double ego_radius_;
};

Eigen::Matrix4d pose2_to_matrix(const Pose2& p);

}  // namespace forge::sim
