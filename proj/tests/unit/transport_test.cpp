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

#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "forge/errors.hpp"
#include "forge/sim/transport.hpp"
#include "wire_gen.hpp"

namespace forge::sim {
namespace {

using namespace std::chrono_literals;

class TransportTest : public ::testing::TestWithParam<TransportKind> {};

TEST_P(TransportTest, DeliversInOrderBothWays) {
  auto [a, b] = make_link(GetParam());
  std::mt19937_64 rng(1);
  std::vector<WireMessage> sent;
  for (int i = 0; i < 50; ++i) {
    sent.push_back(testing::random_message(rng));
    a->send(sent.back());
  }
  for (const auto& m : sent) EXPECT_EQ(b->receive(1000ms), m);
  const WireMessage back = make_message(MessageType::kShutdown, 1, "{}");
  b->send(back);
  EXPECT_EQ(a->receive(1000ms), back);
}

TEST_P(TransportTest, CrossThreadExchange) {
  auto [a, b] = make_link(GetParam());
  std::thread peer([&b] {
    for (std::uint64_t i = 0; i < 20; ++i) {
      WireMessage m = b->receive(2000ms);
      m.seq += 1000;
      b->send(m);
    }
  });
  for (std::uint64_t i = 0; i < 20; ++i) {
    a->send(make_message(MessageType::kTick, i, R"({"tick":1})"));
    EXPECT_EQ(a->receive(2000ms).seq, i + 1000);
  }
  peer.join();
}

TEST_P(TransportTest, SilentPeerTimesOut) {
  auto [a, b] = make_link(GetParam());
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(a->receive(50ms), TimeoutError);
  EXPECT_GE(std::chrono::steady_clock::now() - t0, 45ms);
}

TEST_P(TransportTest, ClosedPeerIsAProtocolError) {
  auto [a, b] = make_link(GetParam());
  b.reset();
  EXPECT_THROW(a->receive(1000ms), ProtocolError);
}

INSTANTIATE_TEST_SUITE_P(Kinds, TransportTest,
                         ::testing::Values(TransportKind::kInProcess, TransportKind::kSocket),
                         [](const auto& info) {
                           return info.param == TransportKind::kInProcess ? "InProcess" : "Socket";
                         });

}  // namespace
}  // namespace forge::sim
