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

#include "forge/canvas.hpp"
#include "forge/ope.hpp"
#include "forge/scene.hpp"

namespace {

using namespace forge;

Scene rig_scene() { return load_scene(FORGE_DATA_DIR "/scenes/nuscenes_rig.json"); }

void BM_RasterizeLayout(benchmark::State& state) {
  const Scene s = rig_scene();
  const auto side = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_layout(s.layout, s.rig, 0, {side, side}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_RasterizeLayout)->Arg(64)->Arg(256);

void BM_RasterizeBoxes(benchmark::State& state) {
  const Scene s = rig_scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize_boxes(s.boxes, s.rig, 0, {224, 400}, s.box_classes.size()));
  }
}
BENCHMARK(BM_RasterizeBoxes);

void BM_ObjectPositionEmbedding(benchmark::State& state) {
  const Scene s = rig_scene();
  std::mt19937_64 rng(4);
  const Tensor world = frustum_world_points(s.rig, 25, 14, 16);
  const Tensor normalized = normalize_frustum(world, Roi{});
  const MlpParams enc = make_ope_encoder(16, 64, rng);
  for (auto _ : state) {
    const FrustumMask3D mask = build_3d_mask(world, s.boxes);
    benchmark::DoNotOptimize(object_position_embedding(normalized, mask, enc));
  }
}
BENCHMARK(BM_ObjectPositionEmbedding);

}  // namespace
