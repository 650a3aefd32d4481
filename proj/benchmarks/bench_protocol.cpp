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

#include <benchmark/benchmark.h>

#include "forge/sim/protocol.hpp"

namespace {

using namespace forge::sim;

SimWindow sample_window() {
  SimWindow w{100, {}};
  for (int i = 0; i < 7; ++i) {
    SimFrame f;
    f.tick = 100 + i;
    f.time = 0.1 * f.tick;
    f.ego = {1.5 * i, 0.2, 0.01};
    f.ego_speed = 8.0;
    for (int a = 0; a < 8; ++a) f.agents.push_back({a, {20.0 + a, 3.5, 3.1}, 5.0, 1.0});
    w.frames.push_back(f);
  }
  return w;
}

void BM_EncodeWindow(benchmark::State& state) {
  const SimWindow w = sample_window();
  std::uint64_t seq = 0;
  for (auto _ : state) benchmark::DoNotOptimize(encode_message(make_message(MessageType::kWindow, ++seq, to_payload(w))));
}
BENCHMARK(BM_EncodeWindow);

void BM_DecodeWindow(benchmark::State& state) {
  const auto bytes = encode_message(make_message(MessageType::kWindow, 1, to_payload(sample_window())));
  for (auto _ : state) benchmark::DoNotOptimize(window_from_payload(decode_message(bytes).payload));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_DecodeWindow);

}  // namespace
