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

// Closed/open-loop coordinator. Drives the traffic manager one tick at a
// time, keeps the 7-frame window queue, forwards windows to the dreamer and
// keyframes to the agent, and optionally feeds the agent's plan back as ego
// control. Every exchanged message is logged as one JSON line.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "forge/sim/endpoints.hpp"
#include "forge/sim/metrics.hpp"
#include "forge/sim/scenario.hpp"
#include "forge/sim/transport.hpp"

namespace forge::sim {

inline constexpr std::size_t kWindowFrames = 7;
inline constexpr std::size_t kWindowOverlap = 2;
inline constexpr std::size_t kWindowStride = kWindowFrames - kWindowOverlap;

enum class LoopMode { kOpen, kClosed };
LoopMode parse_loop_mode(const std::string& text);

struct CoordinatorConfig {
  LoopMode mode = LoopMode::kClosed;
  std::int64_t horizon = 600;  // ticks
  TransportKind transport = TransportKind::kInProcess;
  std::chrono::milliseconds timeout{5000};
  DreamerConfig dreamer;
  PdmsConfig pdms;
  // EP reference for one keyframe segment, as a fraction of cruise distance.
  double progress_fraction = 0.9;
};

/// Endpoint instances for one episode. Null members are replaced by the
/// default traffic / dreamer / agent endpoints.
struct EndpointSet {
  std::unique_ptr<Endpoint> traffic;
  std::unique_ptr<Endpoint> dreamer;
  std::unique_ptr<Endpoint> agent;
};

struct SegmentScore {
  std::int64_t keyframe = 0;
  PdmsReport report;
};

struct Episode {
  std::vector<std::string> log;  // JSON lines
  bool aborted = false;
  std::string abort_reason;
  std::vector<SimFrame> frames;
  std::vector<TrajectoryMsg> plans;
  std::vector<SegmentScore> segments;
  std::optional<PdmsReport> overall;  // whole-episode track
  double route_completion = 0.0;
  std::optional<double> ads;
};

Episode run_episode(const Scenario& scenario, const CoordinatorConfig& cfg, EndpointSet endpoints = {});

/// Facts recovered from an episode log, for verification.
struct LogSummary {
  struct Window {
    std::int64_t tick = 0;
    std::int64_t start = 0;
    std::vector<std::int64_t> frames;
  };
  struct Apply {
    std::int64_t tick = 0;
    std::int64_t source_tick = 0;
    std::int64_t index = 0;
  };
  std::vector<Window> windows;
  std::vector<std::int64_t> keyframes;        // keyframe tick of each dispatch
  std::vector<std::int64_t> keyframe_ticks;   // tick at which it was dispatched
  std::vector<std::int64_t> trajectory_sources;
  std::vector<Apply> applies;
  std::vector<Pose2> ego;  // per tick, as reported by traffic
  bool sequences_increasing = true;
  bool aborted = false;
};

/// Throws Error on a malformed line.
LogSummary summarize_log(const std::vector<std::string>& lines);

}  // namespace forge::sim
