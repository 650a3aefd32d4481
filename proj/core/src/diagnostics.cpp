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

#include "forge/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "forge/encoders.hpp"
#include "forge/grad_check.hpp"
#include "forge/mta.hpp"
#include "forge/ope.hpp"

namespace forge {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Eigen::Matrix4d random_motion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Matrix3d r = (Eigen::AngleAxisd(0.2 * n(rng), Eigen::Vector3d::UnitZ()) *
                             Eigen::AngleAxisd(0.05 * n(rng), Eigen::Vector3d::UnitY()))
                                .toRotationMatrix();
  return make_pose(r, Eigen::Vector3d(n(rng), 0.3 * n(rng), 0.05 * n(rng)));
}

std::vector<Eigen::Matrix4d> random_motions(std::size_t n, std::mt19937_64& rng) {
  std::vector<Eigen::Matrix4d> out{Eigen::Matrix4d::Identity()};
  while (out.size() < n) out.push_back(random_motion(rng));
  return out;
}

ZeroConvParams random_zero_conv(std::size_t c, std::mt19937_64& rng) {
  ZeroConvParams z;
  z.map = Linear::random(c, c, rng);
  return z;
}

template <class Forward>
double input_error(const Tensor& x, const Tensor& analytic, const Tensor& w, Forward&& f, double eps) {
  Tensor probe = x;
  return grad_check(
      [&](std::span<const double> v) {
        std::copy(v.begin(), v.end(), probe.data());
        return dot(w, f(probe));
      },
      analytic.values(), x.values(), eps);
}

template <class P, class Forward>
double param_error(const P& params, const P& analytic, const Tensor& w, Forward&& f, double eps) {
  return check_param_gradient<P>(
             params, [&](const P& p) { return dot(w, f(p)); }, analytic, eps)
      .max_rel_error;
}

Camera random_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Camera cam;
  cam.name = "cam";
  cam.image_height = 32;
  cam.image_width = 48;
  cam.intrinsics << 40.0 + 10.0 * u(rng), 0.0, 24.0, 0.0, 40.0 + 10.0 * u(rng), 16.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3d front = (Eigen::Matrix3d() << 0, 0, 1, -1, 0, 0, 0, -1, 0).finished();
  cam.rotation = yaw_rotation(3.0 * u(rng)) * front;
  cam.translation = Eigen::Vector3d(u(rng), 0.5 * u(rng), 1.5 + 0.2 * u(rng));
  return cam;
}

}  // namespace

IdentityProbe mta_identity_probe(std::size_t blocks, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  IdentityProbe probe;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t hw = pick(rng, 1, 64);
    const std::size_t heads = pick(rng, 1, 4);
    const std::size_t c = heads * pick(rng, 1, 64 / heads);
    const std::size_t m = 2, t = 7;
    MotionBlock block{Tensor::randn({hw, m, c}, rng), Tensor::randn({hw, t, c}, rng), random_motions(m + t, rng)};
    const MtaParams params = MtaParams::random(c, heads, rng);
    const Tensor out = mta_forward(block, params);
    probe.max_deviation = std::max(probe.max_deviation, max_abs_diff(out, block.latents));
    probe.bit_exact = probe.bit_exact && out.identical(block.latents);
    ++probe.blocks;
  }
  return probe;
}

std::vector<GradientCase> gradient_sweep(std::size_t configs, std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  std::vector<GradientCase> out;
  const auto add_case = [&](std::string name, std::size_t config, std::size_t checked, double err) {
    out.push_back(GradientCase{std::move(name), config, checked, err});
  };

  for (std::size_t k = 0; k < configs; ++k) {
    const std::size_t heads = pick(rng, 1, 2);
    const std::size_t c = heads * pick(rng, 1, 3);
    const std::size_t hw = pick(rng, 1, 3);
    const std::size_t m = pick(rng, 1, 2);
    const std::size_t t = pick(rng, 2, 4);

    {  // local motion module
      const LmmParams p = LmmParams::random(c, rng);
      const Tensor x = Tensor::randn({hw, t, c}, rng);
      const Tensor w = Tensor::randn({hw, t, c}, rng);
      LmmParams g = zeros_like(p);
      const Tensor dx = local_motion_backward(x, p, w, g);
      add_case("local_motion/input", k, x.size(),
               input_error(x, dx, w, [&](const Tensor& v) { return local_motion(v, p); }, eps));
      add_case("local_motion/params", k, param_count(p),
               param_error(p, g, w, [&](const LmmParams& q) { return local_motion(x, q); }, eps));
    }

    {  // motion-aware temporal attention with live residual gates
      MtaParams p = MtaParams::random(c, heads, rng);
      p.attn_out = random_zero_conv(c, rng);
      p.motion_out = random_zero_conv(c, rng);
      const MotionBlock block{Tensor::randn({hw, m, c}, rng), Tensor::randn({hw, t, c}, rng),
                              random_motions(m + t, rng)};
      const Tensor w = Tensor::randn({hw, t, c}, rng);
      MtaParams g = zeros_like(p);
      const MtaInputGradient d = mta_backward(block, p, w, g);
      add_case("mta_forward/latents", k, block.latents.size(),
               input_error(block.latents, d.d_latents, w,
                           [&](const Tensor& v) {
                             MotionBlock b = block;
                             b.latents = v;
                             return mta_forward(b, p);
                           },
                           eps));
      add_case("mta_forward/motion", k, block.motion.size(),
               input_error(block.motion, d.d_motion, w,
                           [&](const Tensor& v) {
                             MotionBlock b = block;
                             b.motion = v;
                             return mta_forward(b, p);
                           },
                           eps));
      add_case("mta_forward/params", k, param_count(p),
               param_error(p, g, w, [&](const MtaParams& q) { return mta_forward(block, q); }, eps));
    }

    {  // augmented spatial attention
      const std::size_t cams = pick(rng, 1, 2), tokens = pick(rng, 2, 4);
      const AttentionParams attn = AttentionParams::random(c, heads, rng);
      const Tensor z = Tensor::randn({cams, tokens, c}, rng);
      const Tensor e = Tensor::randn({cams, tokens, c}, rng);
      const Tensor w = Tensor::randn({cams, tokens, c}, rng);
      const AsaGradient d = augmented_spatial_attention_backward(z, e, attn, w);
      add_case("augmented_spatial_attention/latents", k, z.size(),
               input_error(z, d.d_latents, w,
                           [&](const Tensor& v) { return augmented_spatial_attention(v, e, attn); }, eps));
      add_case("augmented_spatial_attention/embedding", k, e.size(),
               input_error(e, d.d_embedding, w,
                           [&](const Tensor& v) { return augmented_spatial_attention(z, v, attn); }, eps));
      add_case("augmented_spatial_attention/query", k, attn.wq.size(),
               input_error(attn.wq, d.d_query, w,
                           [&](const Tensor& v) {
                             AttentionParams a = attn;
                             a.wq = v;
                             return augmented_spatial_attention(z, e, a);
                           },
                           eps));
    }

    {  // object-wise position embedding
      const std::size_t cams = pick(rng, 1, 2), wf = pick(rng, 1, 3), hf = pick(rng, 1, 3), depth = pick(rng, 1, 3);
      const MlpParams enc = make_ope_encoder(depth, c, rng);
      const Tensor normalized = Tensor::uniform({cams, wf, hf, depth * 3}, rng, 0.0, 1.0);
      FrustumMask3D mask{{cams, wf, hf, depth}, {}};
      std::bernoulli_distribution coin(0.5);
      for (std::size_t i = 0; i < cams * wf * hf * depth; ++i) mask.inside.push_back(coin(rng) ? 1 : 0);
      const Tensor w = Tensor::randn({cams, wf, hf, c}, rng);
      MlpParams g = zeros_like(enc);
      object_position_embedding_backward(normalized, mask, enc, w, g);
      add_case("object_position_embedding/params", k, param_count(enc),
               param_error(enc, g, w,
                           [&](const MlpParams& q) { return object_position_embedding(normalized, mask, q); },
                           eps));
    }

    {  // condition encoders
      const int bands = static_cast<int>(pick(rng, 1, 3));
      CameraRig rig{{random_camera(rng)}};
      const CameraEncoder cam = CameraEncoder::random(c, bands, rng);
      const Tensor wc = Tensor::randn({c}, rng);
      CameraEncoder gc = zeros_like(cam);
      encode_camera_backward(rig, 0, cam, wc.values(), gc);
      add_case("camera_encoder/params", k, param_count(cam),
               param_error(cam, gc, wc,
                           [&](const CameraEncoder& q) { return Tensor({c}, encode_camera(rig, 0, q)); }, eps));

      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Box3D box;
      box.center = Eigen::Vector3d(10.0 * u(rng), 10.0 * u(rng), u(rng));
      box.size = Eigen::Vector3d(4.0 + u(rng), 2.0 + 0.5 * u(rng), 1.5 + 0.3 * u(rng));
      box.yaw = 3.0 * u(rng);
      box.class_id = static_cast<int>(pick(rng, 0, 2));
      const BoxEncoder be = BoxEncoder::random(c, 3, bands, rng);
      const Tensor wb = Tensor::randn({c}, rng);
      BoxEncoder gb = zeros_like(be);
      encode_box_backward(box, be, wb.values(), gb);
      add_case("box_encoder/params", k, param_count(be),
               param_error(be, gb, wb, [&](const BoxEncoder& q) { return Tensor({c}, encode_box(box, q)); },
                           eps));

      const std::size_t in = pick(rng, 1, 3), extent = pick(rng, 4, 9);
      const ConvStack stack = ConvStack::downsample4(in, 2, c, rng);
      const Tensor grid = Tensor::randn({in, extent, extent + 1}, rng);
      const Tensor probe = encode_grid(grid, stack);
      const Tensor wg = Tensor::randn(probe.dims(), rng);
      ConvStack gs = zeros_like(stack);
      const Tensor dgrid = conv_stack_backward(stack, grid, wg, gs);
      add_case("grid_encoder/input", k, grid.size(),
               input_error(grid, dgrid, wg, [&](const Tensor& v) { return encode_grid(v, stack); }, eps));
      add_case("grid_encoder/params", k, param_count(stack),
               param_error(stack, gs, wg, [&](const ConvStack& q) { return encode_grid(grid, q); }, eps));
    }
  }
  return out;
}

}  // namespace forge
