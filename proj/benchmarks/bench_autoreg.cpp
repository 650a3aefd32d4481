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

#include "forge/autoreg.hpp"

namespace {

using namespace forge;

void BM_DenoiseClipFixedPoint(benchmark::State& state) {
  const LatentGeometry geo{6, 4, 28, 50};
  FixedPointDenoiser d(geo);
  const auto sched = make_schedule(1000);
  ClipRequest req;
  req.steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(denoise_clip(req, d, sched, 7, geo));
}
BENCHMARK(BM_DenoiseClipFixedPoint)->Arg(4)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_DenoiseClipToy(benchmark::State& state) {
  const Scene scene = load_scene(FORGE_DATA_DIR "/scenes/minimal.json");
  const RunConfig cfg = resolve_config(scene.overrides, {});
  const ConditionBuilder builder(scene, cfg, 3);
  const LatentGeometry geo{1, 4, cfg.latent_height(), cfg.latent_width()};
  ToyDenoiser d(geo, builder.ope_encoder().out_features(), 3);
  TrackSceneStream stream(scene, cfg.fps);
  std::vector<FrameConditions> conds;
  for (std::size_t i = 0; i < 7; ++i) conds.push_back(builder.build(*stream.frame(i)));
  const auto sched = make_schedule(1000);
  ClipRequest req;
  req.steps = 4;
  req.conditions = &conds;
  for (auto _ : state) benchmark::DoNotOptimize(denoise_clip(req, d, sched, 7, geo));
}
BENCHMARK(BM_DenoiseClipToy)->Unit(benchmark::kMillisecond);

}  // namespace
