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

// Scripted traffic scenarios: route, drivable area and constant-velocity
// agents, loaded from JSON documents.

#include <filesystem>
#include <string>
#include <vector>

#include "forge/sim/metrics.hpp"
#include "forge/sim/protocol.hpp"

namespace forge::sim {

struct ScriptedAgent {
  int id = 0;
  Pose2 start;
  double speed = 0.0;  // m/s along the start heading
  double radius = 1.0;

  AgentState at_tick(std::int64_t tick) const;
};

struct Scenario {
  std::string name;
  Route route;
  double ego_speed = 8.0;  // cruise speed of the autopilot and the scripted planner
  DrivableMask drivable;
  std::vector<ScriptedAgent> agents;
  std::int64_t ticks = 600;
};

/// Throws SchemaError naming the offending field.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace forge::sim
