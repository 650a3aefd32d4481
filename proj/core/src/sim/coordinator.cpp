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

#include "forge/sim/coordinator.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <thread>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/sim/trajectory.hpp"

namespace forge::sim {

using nlohmann::json;

LoopMode parse_loop_mode(const std::string& text) {
  if (text == "open") return LoopMode::kOpen;
  if (text == "closed") return LoopMode::kClosed;
  throw Error("unknown loop mode '" + text + "' (expected open or closed)");
}

namespace {

struct Channel {
  std::string name;
  std::unique_ptr<Link> link;
  std::uint64_t seq = 0;
  SequenceGuard guard;
  Channel(std::string n, std::unique_ptr<Link> l) : name(n), link(std::move(l)), guard(n + " reply") {}
};

class Session {
 public:
  Session(const CoordinatorConfig& cfg, Episode& ep) : cfg_(cfg), ep_(ep) {}

  void record(json j) { ep_.log.push_back(j.dump()); }

  WireMessage exchange(Channel& ch, std::int64_t tick, MessageType type, const std::string& payload,
                       MessageType expected) {
    const WireMessage out = make_message(type, ++ch.seq, payload);
    record({{"tick", tick}, {"kind", "msg"}, {"channel", ch.name}, {"dir", "out"},
            {"type", type_tag(out.type)}, {"seq", out.seq}});
    ch.link->send(out);
    WireMessage in;
    try {
      in = ch.link->receive(cfg_.timeout);
    } catch (const TimeoutError& e) {
      throw TimeoutError(ch.name + ": " + e.what());
    }
    record({{"tick", tick}, {"kind", "msg"}, {"channel", ch.name}, {"dir", "in"},
            {"type", type_tag(in.type)}, {"seq", in.seq}});
    ch.guard.check(in);
    if (in.type != expected) {
      throw ProtocolError(ch.name + " replied '" + std::string(type_tag(in.type)) + "', expected '" +
                          std::string(type_tag(expected)) + "'");
    }
    return in;
  }

 private:
  const CoordinatorConfig& cfg_;
  Episode& ep_;
};

json pose_json(const Pose2& p) { return json::array({p.x, p.y, p.heading}); }

void score(const Scenario& scenario, const CoordinatorConfig& cfg, Episode& ep) {
  const auto& frames = ep.frames;
  if (frames.empty()) return;
  const auto track = [&](std::size_t from, std::size_t to, std::vector<Pose2>& ego,
                         std::vector<AgentTrack>& agents) {
    std::map<int, AgentTrack> by_id;
    for (std::size_t i = from; i < to; ++i) {
      ego.push_back(frames[i].ego);
      for (const auto& a : frames[i].agents) {
        auto& t = by_id[a.id];
        t.radius = a.radius;
        t.poses.push_back(a.pose);
      }
    }
    for (auto& [id, t] : by_id) {
      if (t.poses.size() == ego.size()) agents.push_back(std::move(t));
    }
  };

  PdmsConfig seg_cfg = cfg.pdms;
  seg_cfg.reference_progress = cfg.progress_fraction * scenario.ego_speed * kWindowStride * kTickSeconds;
  std::vector<double> scores;
  for (const auto& plan : ep.plans) {
    const auto k = static_cast<std::size_t>(plan.source_tick);
    if (k + kWindowStride >= frames.size()) break;
    std::vector<Pose2> ego;
    std::vector<AgentTrack> agents;
    track(k, k + kWindowStride + 1, ego, agents);
    const PdmsReport r = pdms(ego, agents, scenario.drivable, scenario.route, seg_cfg);
    ep.segments.push_back({plan.source_tick, r});
    scores.push_back(r.score);
  }

  std::vector<Pose2> ego;
  std::vector<AgentTrack> agents;
  track(0, frames.size(), ego, agents);
  PdmsConfig all_cfg = cfg.pdms;
  all_cfg.reference_progress =
      cfg.progress_fraction * scenario.ego_speed * kTickSeconds * static_cast<double>(frames.size() - 1);
  if (all_cfg.reference_progress > 0.0) {
    ep.overall = pdms(ego, agents, scenario.drivable, scenario.route, all_cfg);
  }
  const double length = scenario.route.length();
  ep.route_completion = std::clamp(scenario.route.project({ego.back().x, ego.back().y}) / length, 0.0, 1.0);
  if (!scores.empty()) ep.ads = ads(scores, ep.route_completion);
}

}  // namespace

Episode run_episode(const Scenario& scenario, const CoordinatorConfig& cfg, EndpointSet endpoints) {
  if (cfg.horizon <= 0) throw Error("episode horizon must be positive");
  if (!endpoints.traffic) endpoints.traffic = std::make_unique<TrafficEndpoint>(scenario);
  if (!endpoints.dreamer) endpoints.dreamer = std::make_unique<DreamerEndpoint>(cfg.dreamer);
  if (!endpoints.agent) endpoints.agent = std::make_unique<AgentEndpoint>(scenario, cfg.pdms.ego_radius);

  Episode ep;
  Session session(cfg, ep);
  std::vector<Channel> channels;
  std::vector<std::unique_ptr<Link>> remote;
  for (const char* name : {"traffic", "dreamer", "agent"}) {
    auto [local, peer] = make_link(cfg.transport);
    channels.emplace_back(name, std::move(local));
    remote.push_back(std::move(peer));
  }
  Endpoint* actors[] = {endpoints.traffic.get(), endpoints.dreamer.get(), endpoints.agent.get()};
  std::optional<std::string> actor_errors[3];
  std::vector<std::thread> threads;
  const auto idle = cfg.timeout * 4;
  for (std::size_t i = 0; i < 3; ++i) {
    threads.emplace_back([&, i] { actor_errors[i] = run_endpoint(*actors[i], *remote[i], idle); });
  }
  Channel& traffic = channels[0];
  Channel& dreamer = channels[1];
  Channel& agent = channels[2];

  std::deque<SimFrame> queue;
  std::optional<std::int64_t> plan_source;
  std::vector<Pose2> dense;
  std::int64_t tick = 0;
  try {
    for (; tick < cfg.horizon; ++tick) {
      TickRequest req{tick, std::nullopt};
      if (cfg.mode == LoopMode::kClosed && plan_source) {
        const std::int64_t index = tick - *plan_source;
        if (index >= 1 && index < static_cast<std::int64_t>(dense.size())) {
          req.control = dense[static_cast<std::size_t>(index)];
          session.record({{"tick", tick}, {"kind", "apply"}, {"source_tick", *plan_source}, {"index", index}});
        }
      }
      const SimFrame frame =
          frame_from_payload(session.exchange(traffic, tick, MessageType::kTick, to_payload(req), MessageType::kTick)
                                 .payload);
      if (frame.tick != tick) throw ProtocolError("traffic answered for tick " + std::to_string(frame.tick));
      session.record({{"tick", tick}, {"kind", "frame"}, {"ego", pose_json(frame.ego)}, {"speed", frame.ego_speed}});
      ep.frames.push_back(frame);
      queue.push_back(frame);
      if (queue.size() > kWindowFrames) queue.pop_front();
      if (queue.size() < kWindowFrames || (tick + 1 - static_cast<std::int64_t>(kWindowFrames)) % kWindowStride != 0) {
        continue;
      }

      SimWindow window{queue.front().tick, {queue.begin(), queue.end()}};
      json ticks = json::array();
      for (const auto& f : window.frames) ticks.push_back(f.tick);
      session.record({{"tick", tick}, {"kind", "window"}, {"start", window.start}, {"frames", ticks}});
      const KeyframeImages key = keyframe_from_payload(
          session.exchange(dreamer, tick, MessageType::kWindow, to_payload(window), MessageType::kKeyframeImages)
              .payload);
      if (key.frame.tick != tick) throw ProtocolError("dreamer returned keyframe for tick " + std::to_string(key.frame.tick));
      session.record({{"tick", tick}, {"kind", "keyframe"}, {"frame", key.frame.tick}});
      const TrajectoryMsg plan = trajectory_from_payload(
          session.exchange(agent, tick, MessageType::kKeyframeImages, to_payload(key), MessageType::kTrajectory)
              .payload);
      if (plan.source_tick != key.frame.tick) throw ProtocolError("agent plan does not match the keyframe");
      session.record({{"tick", tick}, {"kind", "trajectory"}, {"source_tick", plan.source_tick},
                      {"points", plan.points.size()}});
      ep.plans.push_back(plan);
      if (cfg.mode == LoopMode::kClosed) {
        dense = interpolate_trajectory(plan, key.frame.ego);
        plan_source = plan.source_tick;
      }
    }
  } catch (const std::exception& e) {
    ep.aborted = true;
    ep.abort_reason = e.what();
    session.record({{"tick", tick}, {"kind", "abort"}, {"reason", ep.abort_reason}});
  }

  for (auto& ch : channels) {
    try {
      ch.link->send(make_message(MessageType::kShutdown, ++ch.seq, "{}"));
    } catch (const std::exception&) {
      // endpoint already gone
    }
  }
  for (auto& t : threads) t.join();
  if (ep.aborted) {
    for (const auto& err : actor_errors) {
      if (err) ep.abort_reason += "; " + *err;
    }
  }
  score(scenario, cfg, ep);
  return ep;
}

LogSummary summarize_log(const std::vector<std::string>& lines) {
  LogSummary s;
  std::map<std::string, std::uint64_t> last_seq;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json j;
    try {
      j = json::parse(lines[i]);
      const auto tick = j.at("tick").get<std::int64_t>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "msg") {
        const std::string key = j.at("channel").get<std::string>() + "/" + j.at("dir").get<std::string>();
        const auto seq = j.at("seq").get<std::uint64_t>();
        const auto it = last_seq.find(key);
        if (it != last_seq.end() && seq <= it->second) s.sequences_increasing = false;
        last_seq[key] = seq;
      } else if (kind == "frame") {
        const auto& p = j.at("ego");
        s.ego.push_back(Pose2{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
      } else if (kind == "window") {
        s.windows.push_back({tick, j.at("start").get<std::int64_t>(),
                             j.at("frames").get<std::vector<std::int64_t>>()});
      } else if (kind == "keyframe") {
        s.keyframes.push_back(j.at("frame").get<std::int64_t>());
        s.keyframe_ticks.push_back(tick);
      } else if (kind == "trajectory") {
        s.trajectory_sources.push_back(j.at("source_tick").get<std::int64_t>());
      } else if (kind == "apply") {
        s.applies.push_back({tick, j.at("source_tick").get<std::int64_t>(), j.at("index").get<std::int64_t>()});
      } else if (kind == "abort") {
        s.aborted = true;
      } else {
        throw Error("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw Error("episode log line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return s;
}

}  // namespace forge::sim
