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

// Bidirectional message links. Both kinds move encoded frames, so the
// in-process link exercises exactly the same framing as the socket link.

#include <chrono>
#include <memory>
#include <utility>

#include "forge/sim/protocol.hpp"

namespace forge::sim {

class Link {
 public:
  virtual ~Link() = default;
  virtual void send(const WireMessage& m) = 0;
  /// Throws TimeoutError when nothing arrives in time and ProtocolError when
  /// the peer closed the link.
  virtual WireMessage receive(std::chrono::milliseconds timeout) = 0;
};

using LinkPair = std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>>;

LinkPair make_inprocess_link();
/// AF_UNIX stream socket pair.
LinkPair make_socket_link();

enum class TransportKind { kInProcess, kSocket };
LinkPair make_link(TransportKind kind);

}  // namespace forge::sim
