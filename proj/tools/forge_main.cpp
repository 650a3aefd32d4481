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

// forge: command-line front end for the conditioning, generation and
// simulation pipelines.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "forge/autoreg.hpp"
#include "forge/canvas.hpp"
#include "forge/conditions.hpp"
#include "forge/diagnostics.hpp"
#include "forge/errors.hpp"
#include "forge/frgt.hpp"
#include "forge/scene.hpp"
#include "forge/sim/coordinator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace forge;

namespace {

constexpr double kGradTolerance = 1e-4;

struct Options {
  std::string scene;
  std::string scenario;
  std::string out_dir = "forge_out";
  std::string mode = "closed";
  std::string denoiser = "fixed-point";
  std::string transport = "inproc";
  std::string file;
  std::size_t frames = 203;
  std::size_t frame = 0;
  std::int64_t ticks = 600;
  std::size_t blocks = 100;
  std::size_t configs = 20;
  std::uint64_t seed = 0;
  std::optional<std::size_t> steps, overlap;
  std::optional<double> cfg_scale;
};

void configure_logging() {
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("FORGE_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

ConfigOverrides cli_overrides(const Options& o, bool seed_given) {
  ConfigOverrides c;
  c.steps = o.steps;
  c.overlap = o.overlap;
  c.cfg_scale = o.cfg_scale;
  if (seed_given) c.seed = o.seed;
  return c;
}

SceneFrame first_frame(const Scene& scene, const RunConfig& cfg, std::size_t index) {
  TrackSceneStream stream(scene, cfg.fps);
  auto f = stream.frame(index);
  if (!f) throw Error("scene stream has no frame " + std::to_string(index));
  return *f;
}

int cmd_canvas(const Options& o, bool seed_given) {
  const Scene scene = load_scene(o.scene);
  const RunConfig cfg = resolve_config(scene.overrides, cli_overrides(o, seed_given));
  const ConditionBuilder builder(scene, cfg, cfg.seed);
  const FrameConditions cond = builder.build(first_frame(scene, cfg, o.frame));
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  save_frgt(dir / "canvas.frgt", cond.canvas);
  const auto& d = cond.canvas.dims();
  for (std::size_t c = 0; c < d[0]; ++c) {
    const Tensor one = slice_leading(cond.canvas, c, 1).reshaped({d[1], d[2], d[3]});
    dump_canvas_images(one, dir, scene.rig.at(c).name.empty() ? "cam" + std::to_string(c) : scene.rig.at(c).name);
  }
  spdlog::info("canvas {} written to {}", shape_string(d), dir.string());
  return 0;
}

int cmd_ope(const Options& o, bool seed_given) {
  const Scene scene = load_scene(o.scene);
  const RunConfig cfg = resolve_config(scene.overrides, cli_overrides(o, seed_given));
  const ConditionBuilder builder(scene, cfg, cfg.seed);
  const FrameConditions cond = builder.build(first_frame(scene, cfg, o.frame));
  fs::create_directories(o.out_dir);
  save_frgt(fs::path(o.out_dir) / "ope.frgt", cond.ope);
  spdlog::info("object-wise embedding {} written to {}", shape_string(cond.ope.dims()), o.out_dir);
  return 0;
}

int cmd_mta_check(const Options& o) {
  const IdentityProbe probe = mta_identity_probe(o.blocks, o.seed);
  std::cout << "identity blocks " << probe.blocks << " max deviation " << probe.max_deviation
            << (probe.bit_exact ? " (bit-exact)" : " (NOT bit-exact)") << "\n";
  double worst = 0.0;
  for (const auto& c : gradient_sweep(o.configs, o.seed)) {
    if (c.name.rfind("mta_forward", 0) == 0 || c.name.rfind("local_motion", 0) == 0) {
      worst = std::max(worst, c.max_rel_error);
    }
  }
  std::cout << "grad max rel err " << worst << "\n";
  return probe.bit_exact && worst <= kGradTolerance ? 0 : 1;
}

int cmd_gradcheck(const Options& o) {
  std::map<std::string, std::pair<std::size_t, double>> by_name;
  for (const auto& c : gradient_sweep(o.configs, o.seed)) {
    auto& [n, err] = by_name[c.name];
    n += c.checked;
    err = std::max(err, c.max_rel_error);
  }
  bool ok = true;
  for (const auto& [name, v] : by_name) {
    const bool pass = v.second <= kGradTolerance;
    ok = ok && pass;
    std::cout << (pass ? "ok   " : "FAIL ") << name << "  coords " << v.first << "  max rel err "
              << v.second << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_generate(const Options& o, bool seed_given) {
  const Scene scene = load_scene(o.scene);
  const RunConfig cfg = resolve_config(scene.overrides, cli_overrides(o, seed_given));
  const LatentGeometry geo{scene.rig.size(), 4, cfg.latent_height(), cfg.latent_width()};

  std::unique_ptr<ConditionBuilder> builder;
  std::unique_ptr<Denoiser> denoiser;
  if (o.denoiser == "fixed-point") {
    denoiser = std::make_unique<FixedPointDenoiser>(geo);
  } else if (o.denoiser == "toy") {
    builder = std::make_unique<ConditionBuilder>(scene, cfg, cfg.seed);
    denoiser = std::make_unique<ToyDenoiser>(geo, builder->ope_encoder().out_features(), cfg.seed);
  } else {
    throw Error("unknown denoiser '" + o.denoiser + "' (expected fixed-point or toy)");
  }

  TrackSceneStream stream(scene, cfg.fps);
  ManifestWriter writer(o.out_dir);
  GenerateOptions opts{cfg, o.frames, geo, builder.get()};
  const GenerateReport report =
      generate_long_video(stream, *denoiser, opts, [&](const EmittedFrame& f) { writer(f); });

  double discontinuity = 0.0;
  std::int64_t peak_min = 0, peak_max = 0;
  for (std::size_t i = 0; i < report.clips.size(); ++i) {
    const auto& c = report.clips[i];
    spdlog::debug("clip {} frames {}..{} emitted {} overlap {} peak tensors {}", c.clip, c.first_frame,
                  c.first_frame + c.frames - 1, c.emitted_count, c.overlap, c.peak_live_tensors);
    discontinuity = std::max(discontinuity, c.overlap_discontinuity);
    if (i >= 2) {
      peak_min = i == 2 ? c.peak_live_tensors : std::min(peak_min, c.peak_live_tensors);
      peak_max = std::max(peak_max, c.peak_live_tensors);
    }
  }
  std::cout << "frames emitted " << report.frames_emitted << " clips " << report.clips.size()
            << " max overlap discontinuity " << discontinuity << " peak live tensors " << peak_min << ".."
            << peak_max << (report.stream_exhausted ? " (stream exhausted)" : "") << "\n";
  spdlog::info("manifest written to {}", (fs::path(o.out_dir) / "manifest.jsonl").string());
  return report.frames_emitted == o.frames ? 0 : 1;
}

json report_json(const sim::PdmsReport& r) {
  return {{"nc", r.nc}, {"dac", r.dac}, {"ep", r.ep}, {"ttc", r.ttc}, {"comfort", r.comfort}, {"pdms", r.score}};
}

int cmd_simulate(const Options& o) {
  const sim::Scenario scenario = sim::load_scenario(o.scenario);
  sim::CoordinatorConfig cfg;
  cfg.mode = sim::parse_loop_mode(o.mode);
  cfg.horizon = o.ticks;
  cfg.dreamer.seed = o.seed;
  if (o.steps) cfg.dreamer.steps = *o.steps;
  if (o.transport == "socket") {
    cfg.transport = sim::TransportKind::kSocket;
  } else if (o.transport != "inproc") {
    throw Error("unknown transport '" + o.transport + "' (expected inproc or socket)");
  }
  const sim::Episode ep = sim::run_episode(scenario, cfg);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  {
    std::ofstream log(dir / "episode.jsonl");
    for (const auto& line : ep.log) log << line << "\n";
  }
  json report{{"scenario", scenario.name},
              {"mode", o.mode},
              {"ticks", ep.frames.size()},
              {"aborted", ep.aborted},
              {"route_completion", ep.route_completion}};
  if (ep.aborted) report["abort_reason"] = ep.abort_reason;
  if (ep.overall) report["episode"] = report_json(*ep.overall);
  if (ep.ads) report["ads"] = *ep.ads;
  json segs = json::array();
  for (const auto& s : ep.segments) {
    json j = report_json(s.report);
    j["keyframe"] = s.keyframe;
    segs.push_back(j);
  }
  report["segments"] = segs;
  std::ofstream(dir / "report.json") << report.dump(2) << "\n";

  std::cout << "ticks " << ep.frames.size() << " plans " << ep.plans.size() << " route completion "
            << ep.route_completion;
  if (ep.overall) std::cout << " PDMS " << ep.overall->score;
  if (ep.ads) std::cout << " ADS " << *ep.ads;
  std::cout << "\n";
  if (ep.aborted) {
    spdlog::error("episode aborted: {}", ep.abort_reason);
    return 1;
  }
  return 0;
}

int cmd_fmt_dump(const Options& o) {
  const Tensor t = load_frgt(o.file);
  double lo = 0.0, hi = 0.0, total = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    lo = i == 0 ? t[i] : std::min(lo, t[i]);
    hi = i == 0 ? t[i] : std::max(hi, t[i]);
    total += t[i];
  }
  std::cout << "shape " << shape_string(t.dims()) << " elements " << t.size() << "\n";
  if (!t.empty()) {
    std::cout << "min " << lo << " max " << hi << " mean " << total / static_cast<double>(t.size()) << "\n";
    std::cout << "head";
    for (std::size_t i = 0; i < std::min<std::size_t>(t.size(), 8); ++i) std::cout << " " << t[i];
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"forge: multi-view conditioning, long-video generation and simulation harness"};
  app.require_subcommand(1);
  Options o;

  const auto scene_opt = [&](CLI::App* sub) { sub->add_option("--scene", o.scene, "scene file")->required(); };
  const auto sampling = [&](CLI::App* sub) {
    sub->add_option("--steps", o.steps, "sampler steps");
    sub->add_option("--cfg-scale", o.cfg_scale, "classifier-free guidance scale");
    sub->add_option("--overlap", o.overlap, "frames shared between consecutive clips");
  };

  auto* canvas = app.add_subcommand("canvas", "rasterize perspective canvases and debug images");
  scene_opt(canvas);
  canvas->add_option("--frame", o.frame, "scene frame index");
  canvas->add_option("--out-dir", o.out_dir);
  auto* canvas_seed = canvas->add_option("--seed", o.seed);

  auto* ope = app.add_subcommand("ope", "compute the object-wise position embedding");
  scene_opt(ope);
  ope->add_option("--frame", o.frame, "scene frame index");
  ope->add_option("--out-dir", o.out_dir);
  auto* ope_seed = ope->add_option("--seed", o.seed);

  auto* mta = app.add_subcommand("mta-check", "zero-init identity and gradient checks of temporal attention");
  mta->add_option("--blocks", o.blocks, "random identity blocks");
  mta->add_option("--configs", o.configs, "random gradient configurations");
  mta->add_option("--seed", o.seed);

  auto* grad = app.add_subcommand("gradcheck", "finite-difference sweep over all differentiable blocks");
  grad->add_option("--configs", o.configs, "random configurations per block");
  grad->add_option("--seed", o.seed);

  auto* gen = app.add_subcommand("generate", "autoregressive long latent video plus manifest");
  scene_opt(gen);
  gen->add_option("--frames", o.frames, "frames to emit");
  gen->add_option("--denoiser", o.denoiser, "fixed-point | toy");
  gen->add_option("--out-dir", o.out_dir);
  auto* gen_seed = gen->add_option("--seed", o.seed);
  sampling(gen);

  auto* simulate = app.add_subcommand("simulate", "run a scripted closed- or open-loop episode");
  simulate->add_option("--scenario", o.scenario, "scenario file")->required();
  simulate->add_option("--mode", o.mode, "open | closed");
  simulate->add_option("--ticks", o.ticks, "episode horizon in 10 Hz ticks");
  simulate->add_option("--transport", o.transport, "inproc | socket");
  simulate->add_option("--steps", o.steps, "dreamer sampler steps");
  simulate->add_option("--out-dir", o.out_dir);
  simulate->add_option("--seed", o.seed);

  auto* dump = app.add_subcommand("fmt-dump", "inspect an FRGT tensor file");
  dump->add_option("file", o.file, "FRGT file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*canvas) return cmd_canvas(o, canvas_seed->count() > 0);
    if (*ope) return cmd_ope(o, ope_seed->count() > 0);
    if (*mta) return cmd_mta_check(o);
    if (*grad) return cmd_gradcheck(o);
    if (*gen) return cmd_generate(o, gen_seed->count() > 0);
    if (*simulate) return cmd_simulate(o);
    if (*dump) return cmd_fmt_dump(o);
  } catch (const SchemaError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
