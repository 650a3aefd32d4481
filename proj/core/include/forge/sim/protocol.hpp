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

// Wire protocol between the simulation coordinator and its endpoints.
//
// Frame layout:
//   u32 little-endian body length (at most 16 MiB)
//   body: compact JSON object {"type": <tag>, "seq": <u64>, "payload": <object>}
//
// Payloads are kept as canonical compact JSON text, so a decoded message
// compares equal to the message that was encoded.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge::sim {

inline constexpr std::size_t kMaxFrameBody = 16u << 20;

enum class MessageType { kWindow, kKeyframeImages, kTrajectory, kTick, kShutdown };

std::string_view type_tag(MessageType type);
/// Throws ProtocolError for an unknown tag.
MessageType parse_type_tag(std::string_view tag);

struct WireMessage {
  MessageType type = MessageType::kTick;
  std::uint64_t seq = 0;
  std::string payload = "{}";  // canonical compact JSON object

  bool operator==(const WireMessage&) const = default;
};

/// Canonicalizes `payload_json`; throws ProtocolError unless it is a JSON object.
WireMessage make_message(MessageType type, std::uint64_t seq, std::string_view payload_json);

std::vector<std::uint8_t> encode_message(const WireMessage& m);
/// Decodes exactly one frame; truncated input, trailing bytes, oversize
/// lengths, malformed bodies and unknown tags all throw ProtocolError.
WireMessage decode_message(std::span<const std::uint8_t> frame);

/// Incremental decoder for stream transports.
class FrameReader {
 public:
  void push(std::span<const std::uint8_t> bytes);
  /// Next complete message, or nullopt when more bytes are needed.
  std::optional<WireMessage> pop();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::deque<std::uint8_t> buffer_;
};

/// Enforces strictly increasing sequence numbers on one channel.
class SequenceGuard {
 public:
  explicit SequenceGuard(std::string channel) : channel_(std::move(channel)) {}
  void check(const WireMessage& m);

 private:
  std::string channel_;
  std::optional<std::uint64_t> last_;
};

// ---- typed payloads ----

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  bool operator==(const Pose2&) const = default;
};

struct AgentState {
  int id = 0;
  Pose2 pose;
  double speed = 0.0;
  double radius = 1.0;
  bool operator==(const AgentState&) const = default;
};

/// One 10 Hz traffic-manager frame.
struct SimFrame {
  std::int64_t tick = 0;
  double time = 0.0;
  Pose2 ego;
  double ego_speed = 0.0;
  std::vector<AgentState> agents;
  bool operator==(const SimFrame&) const = default;
};

struct SimWindow {
  std::int64_t start = 0;
  std::vector<SimFrame> frames;  // 7 consecutive ticks; the last is the keyframe
  bool operator==(const SimWindow&) const = default;
};

struct KeyframeImages {
  SimFrame frame;
  std::string latents_b64;  // FRGT bytes of the keyframe latents, base64
  bool operator==(const KeyframeImages&) const = default;
};

struct TrajectoryMsg {
  std::int64_t source_tick = 0;  // keyframe the plan was computed from
  double issue_time = 0.0;
  std::vector<Pose2> points;     // 6 points at 0.5 s spacing
  bool operator==(const TrajectoryMsg&) const = default;
};

struct TickRequest {
  std::int64_t tick = 0;
  std::optional<Pose2> control;  // ego pose to apply this tick (closed loop)
  bool operator==(const TickRequest&) const = default;
};

std::string to_payload(const SimFrame& f);
std::string to_payload(const SimWindow& w);
std::string to_payload(const KeyframeImages& k);
std::string to_payload(const TrajectoryMsg& t);
std::string to_payload(const TickRequest& r);

SimFrame frame_from_payload(const std::string& payload);
SimWindow window_from_payload(const std::string& payload);
KeyframeImages keyframe_from_payload(const std::string& payload);
TrajectoryMsg trajectory_from_payload(const std::string& payload);
TickRequest tick_request_from_payload(const std::string& payload);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace forge::sim
