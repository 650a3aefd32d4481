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

#include "forge/sim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/sim/trajectory.hpp"

namespace forge::sim {

using nlohmann::json;

AgentState ScriptedAgent::at_tick(std::int64_t tick) const {
  const double d = speed * kTickSeconds * static_cast<double>(tick);
  return AgentState{id,
                    Pose2{start.x + d * std::cos(start.heading), start.y + d * std::sin(start.heading),
                          start.heading},
                    speed, radius};
}

namespace {

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "value must be finite");
  return v;
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "<document>" : path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path.empty() ? key : path + "." + key, "required field missing");
  return *it;
}

std::vector<double> numbers(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) {
    throw SchemaError(path, "expected " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::size_t positive_count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() || j.get<std::size_t>() == 0) {
    throw SchemaError(path, "expected a positive integer");
  }
  return j.get<std::size_t>();
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("<document>", e.what());
  }
  Scenario s;
  const auto& name = require(doc, "name", "");
  if (!name.is_string()) throw SchemaError("name", "expected a string");
  s.name = name.get<std::string>();

  const auto& route = require(doc, "route", "");
  if (!route.is_array() || route.size() < 2) throw SchemaError("route", "expected at least two points");
  for (std::size_t i = 0; i < route.size(); ++i) {
    const auto p = numbers(route[i], 2, "route[" + std::to_string(i) + "]");
    s.route.points.emplace_back(p[0], p[1]);
  }
  if (!(s.route.length() > 0.0)) throw SchemaError("route", "route has zero length");

  s.ego_speed = number(require(doc, "ego_speed", ""), "ego_speed");
  if (!(s.ego_speed > 0.0)) throw SchemaError("ego_speed", "must be positive");
  if (doc.contains("ticks")) s.ticks = static_cast<std::int64_t>(positive_count(doc["ticks"], "ticks"));

  const auto& d = require(doc, "drivable", "");
  const auto origin = numbers(require(d, "origin", "drivable"), 2, "drivable.origin");
  const double res = number(require(d, "resolution", "drivable"), "drivable.resolution");
  if (!(res > 0.0)) throw SchemaError("drivable.resolution", "must be positive");
  const std::size_t rows = positive_count(require(d, "rows", "drivable"), "drivable.rows");
  const std::size_t cols = positive_count(require(d, "cols", "drivable"), "drivable.cols");
  const auto& rects_j = require(d, "rects", "drivable");
  if (!rects_j.is_array()) throw SchemaError("drivable.rects", "expected an array");
  std::vector<Eigen::Vector4d> rects;
  for (std::size_t i = 0; i < rects_j.size(); ++i) {
    const auto q = numbers(rects_j[i], 4, "drivable.rects[" + std::to_string(i) + "]");
    rects.emplace_back(q[0], q[1], q[2], q[3]);
  }
  s.drivable = DrivableMask::from_rects({origin[0], origin[1]}, res, rows, cols, rects);

  if (doc.contains("agents")) {
    const auto& agents = doc["agents"];
    if (!agents.is_array()) throw SchemaError("agents", "expected an array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const std::string path = "agents[" + std::to_string(i) + "]";
      const auto& a = agents[i];
      ScriptedAgent agent;
      const auto& id = require(a, "id", path);
      if (!id.is_number_integer()) throw SchemaError(path + ".id", "expected an integer");
      agent.id = id.get<int>();
      const auto start = numbers(require(a, "start", path), 3, path + ".start");
      agent.start = Pose2{start[0], start[1], start[2]};
      agent.speed = number(require(a, "speed", path), path + ".speed");
      agent.radius = number(require(a, "radius", path), path + ".radius");
      if (!(agent.radius > 0.0)) throw SchemaError(path + ".radius", "must be positive");
      s.agents.push_back(agent);
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace forge::sim
