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

#include "forge/sim/protocol.hpp"

#include <array>

#include <json.hpp>

#include "forge/errors.hpp"

namespace forge::sim {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kTags{"window", "keyframe_images", "trajectory", "tick",
                                                "shutdown"};

}  // namespace

std::string_view type_tag(MessageType type) { return kTags.at(static_cast<std::size_t>(type)); }

MessageType parse_type_tag(std::string_view tag) {
  for (std::size_t i = 0; i < kTags.size(); ++i) {
    if (kTags[i] == tag) return static_cast<MessageType>(i);
  }
  throw ProtocolError("unknown message type '" + std::string(tag) + "'");
}

namespace {

json parse_object(std::string_view text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) throw ProtocolError(std::string(what) + ": expected a JSON object");
  return j;
}

}  // namespace

WireMessage make_message(MessageType type, std::uint64_t seq, std::string_view payload_json) {
  type_tag(type);
  return WireMessage{type, seq, parse_object(payload_json, "payload").dump()};
}

std::vector<std::uint8_t> encode_message(const WireMessage& m) {
  json body{{"type", type_tag(m.type)}, {"seq", m.seq}};
  body["payload"] = parse_object(m.payload, "payload");
  const std::string text = body.dump();
  if (text.size() > kMaxFrameBody) throw ProtocolError("message body exceeds 16 MiB");
  std::vector<std::uint8_t> out(4 + text.size());
  const auto n = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(n >> (8 * i));
  std::copy(text.begin(), text.end(), out.begin() + 4);
  return out;
}

namespace {

std::uint32_t read_length(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

WireMessage decode_body(std::string_view text) {
  const json body = parse_object(text, "message body");
  const auto type = body.find("type");
  const auto seq = body.find("seq");
  const auto payload = body.find("payload");
  if (type == body.end() || !type->is_string()) throw ProtocolError("message body: missing type tag");
  if (seq == body.end() || !seq->is_number_unsigned()) {
    throw ProtocolError("message body: missing or negative sequence number");
  }
  if (payload == body.end() || !payload->is_object()) {
    throw ProtocolError("message body: payload must be an object");
  }
  if (body.size() != 3) throw ProtocolError("message body: unexpected fields");
  return WireMessage{parse_type_tag(type->get<std::string>()), seq->get<std::uint64_t>(),
                     payload->dump()};
}

}  // namespace

WireMessage decode_message(std::span<const std::uint8_t> frame) {
  if (frame.size() < 4) throw ProtocolError("truncated frame header");
  const std::uint32_t n = read_length(frame.data());
  if (n > kMaxFrameBody) throw ProtocolError("frame length " + std::to_string(n) + " exceeds 16 MiB");
  if (frame.size() - 4 < n) throw ProtocolError("truncated frame body");
  if (frame.size() - 4 > n) throw ProtocolError("trailing bytes after frame");
  return decode_body({reinterpret_cast<const char*>(frame.data() + 4), n});
}

void FrameReader::push(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<WireMessage> FrameReader::pop() {
  if (buffer_.size() < 4) return std::nullopt;
  std::array<std::uint8_t, 4> head;
  std::copy_n(buffer_.begin(), 4, head.begin());
  const std::uint32_t n = read_length(head.data());
  if (n > kMaxFrameBody) throw ProtocolError("frame length " + std::to_string(n) + " exceeds 16 MiB");
  if (buffer_.size() - 4 < n) return std::nullopt;
  std::string text(buffer_.begin() + 4, buffer_.begin() + 4 + n);
  buffer_.erase(buffer_.begin(), buffer_.begin() + 4 + n);
  return decode_body(text);
}

void SequenceGuard::check(const WireMessage& m) {
  if (last_ && m.seq <= *last_) {
    throw ProtocolError(channel_ + ": sequence " + std::to_string(m.seq) + " after " +
                        std::to_string(*last_));
  }
  last_ = m.seq;
}

// ---------------------------------------------------------------- payloads

namespace {

json pose_json(const Pose2& p) { return {p.x, p.y, p.heading}; }

template <class T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("payload field '") + key + "': " + e.what());
  }
}

Pose2 pose_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ProtocolError("pose must be [x, y, heading]");
  try {
    return Pose2{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("pose: ") + e.what());
  }
}

json frame_json(const SimFrame& f) {
  json agents = json::array();
  for (const auto& a : f.agents) {
    agents.push_back({{"id", a.id}, {"pose", pose_json(a.pose)}, {"speed", a.speed}, {"radius", a.radius}});
  }
  return {{"tick", f.tick}, {"time", f.time}, {"ego", pose_json(f.ego)}, {"ego_speed", f.ego_speed},
          {"agents", agents}};
}

SimFrame frame_from(const json& j) {
  SimFrame f;
  f.tick = field<std::int64_t>(j, "tick");
  f.time = field<double>(j, "time");
  f.ego = pose_from(j.at("ego"));
  f.ego_speed = field<double>(j, "ego_speed");
  for (const auto& a : j.at("agents")) {
    f.agents.push_back(AgentState{field<int>(a, "id"), pose_from(a.at("pose")),
                                  field<double>(a, "speed"), field<double>(a, "radius")});
  }
  return f;
}

template <class Fn>
auto guarded(const std::string& payload, Fn&& fn) {
  const json j = parse_object(payload, "payload");
  try {
    return fn(j);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("payload: ") + e.what());
  }
}

}  // namespace

std::string to_payload(const SimFrame& f) { return frame_json(f).dump(); }

std::string to_payload(const SimWindow& w) {
  json frames = json::array();
  for (const auto& f : w.frames) frames.push_back(frame_json(f));
  return json{{"start", w.start}, {"frames", frames}}.dump();
}

std::string to_payload(const KeyframeImages& k) {
  return json{{"frame", frame_json(k.frame)}, {"latents", k.latents_b64}}.dump();
}

std::string to_payload(const TrajectoryMsg& t) {
  json pts = json::array();
  for (const auto& p : t.points) pts.push_back(pose_json(p));
  return json{{"source_tick", t.source_tick}, {"issue_time", t.issue_time}, {"points", pts}}.dump();
}

std::string to_payload(const TickRequest& r) {
  json j{{"tick", r.tick}};
  j["control"] = r.control ? pose_json(*r.control) : json(nullptr);
  return j.dump();
}

SimFrame frame_from_payload(const std::string& payload) {
  return guarded(payload, [](const json& j) { return frame_from(j); });
}

SimWindow window_from_payload(const std::string& payload) {
  return guarded(payload, [](const json& j) {
    SimWindow w;
    w.start = field<std::int64_t>(j, "start");
    for (const auto& f : j.at("frames")) w.frames.push_back(frame_from(f));
    return w;
  });
}

KeyframeImages keyframe_from_payload(const std::string& payload) {
  return guarded(payload, [](const json& j) {
    return KeyframeImages{frame_from(j.at("frame")), field<std::string>(j, "latents")};
  });
}

TrajectoryMsg trajectory_from_payload(const std::string& payload) {
  return guarded(payload, [](const json& j) {
    TrajectoryMsg t;
    t.source_tick = field<std::int64_t>(j, "source_tick");
    t.issue_time = field<double>(j, "issue_time");
    for (const auto& p : j.at("points")) t.points.push_back(pose_from(p));
    return t;
  });
}

TickRequest tick_request_from_payload(const std::string& payload) {
  return guarded(payload, [](const json& j) {
    TickRequest r;
    r.tick = field<std::int64_t>(j, "tick");
    const auto& c = j.at("control");
    if (!c.is_null()) r.control = pose_from(c);
    return r;
  });
}

// ---------------------------------------------------------------- base64

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int sextet(char c) {
  const auto pos = kAlphabet.find(c);
  if (pos == std::string_view::npos) throw ProtocolError("invalid base64 character");
  return static_cast<int>(pos);
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::size_t n = std::min<std::size_t>(3, bytes.size() - i);
    std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (n > 1) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (n > 2) v |= bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += n > 1 ? kAlphabet[(v >> 6) & 63] : '=';
    out += n > 2 ? kAlphabet[v & 63] : '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 length must be a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    const int pad = last ? (text[i + 3] == '=') + (text[i + 2] == '=') : 0;
    if (pad == 1 && text[i + 2] == '=') throw ProtocolError("malformed base64 padding");
    std::uint32_t v = static_cast<std::uint32_t>(sextet(text[i])) << 18 |
                      static_cast<std::uint32_t>(sextet(text[i + 1])) << 12;
    if (pad < 2) v |= static_cast<std::uint32_t>(sextet(text[i + 2])) << 6;
    if (pad < 1) v |= static_cast<std::uint32_t>(sextet(text[i + 3]));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace forge::sim
