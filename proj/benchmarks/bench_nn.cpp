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

#include <random>

#include "forge/mta.hpp"
#include "forge/nn.hpp"

namespace {

using namespace forge;

void BM_SelfAttention(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto seq_len = static_cast<std::size_t>(state.range(0));
  const AttentionParams p = AttentionParams::random(64, 4, rng);
  const Tensor x = Tensor::randn({16, seq_len, 64}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(self_attention(p, x));
  state.SetItemsProcessed(state.iterations() * 16 * state.range(0));
}
BENCHMARK(BM_SelfAttention)->Arg(9)->Arg(32)->Arg(128);

void BM_MtaForward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto hw = static_cast<std::size_t>(state.range(0));
  std::vector<EgoPose> poses(9);
  for (std::size_t i = 0; i < poses.size(); ++i) poses[i].world_from_ego(0, 3) = 0.8 * static_cast<double>(i);
  const MotionBlock block{Tensor::randn({hw, 2, 64}, rng), Tensor::randn({hw, 7, 64}, rng),
                          relative_pose_chain(poses)};
  const MtaParams params = MtaParams::random(64, 4, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mta_forward(block, params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MtaForward)->Arg(16)->Arg(64)->Arg(256);

void BM_LocalMotion(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const LmmParams p = LmmParams::random(64, rng);
  const Tensor x = Tensor::randn({256, 7, 64}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(local_motion(x, p));
}
BENCHMARK(BM_LocalMotion);

}  // namespace
