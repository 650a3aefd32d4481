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

#include "forge/mta.hpp"

#include <algorithm>

#include "forge/errors.hpp"

namespace forge {

namespace {

void require_seq(const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw ShapeError(std::string(what) + ": expected (HW, S, C), got " + shape_string(t.dims()));
  }
}

}  // namespace

void MotionBlock::validate() const {
  require_seq(motion, "motion block F_M");
  require_seq(latents, "motion block Z_T");
  if (motion.dim(0) != latents.dim(0) || motion.dim(2) != latents.dim(2)) {
    throw ShapeError("motion block: F_M " + shape_string(motion.dims()) + " and Z_T " +
                     shape_string(latents.dims()) + " disagree on HW or C");
  }
  if (poses.size() != motion.dim(1) + latents.dim(1)) {
    throw ShapeError("motion block: expected " + std::to_string(motion.dim(1) + latents.dim(1)) +
                     " relative poses, got " + std::to_string(poses.size()));
  }
}

std::vector<Eigen::Matrix4d> relative_pose_chain(const std::vector<EgoPose>& poses) {
  std::vector<Eigen::Matrix4d> out;
  out.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out.push_back(i == 0 ? Eigen::Matrix4d::Identity().eval()
                         : relative_pose(poses[i - 1], poses[i]));
  }
  return out;
}

LmmParams LmmParams::random(std::size_t channels, std::mt19937_64& rng) {
  LmmParams p;
  p.phi_q = Linear::random(channels, channels, rng);
  p.phi_k = Linear::random(channels, channels, rng);
  p.phi_v = Linear::random(channels, channels, rng);
  p.gamma_f = TemporalConvBlock::random(channels, rng);
  p.gamma_b = TemporalConvBlock::random(channels, rng);
  p.gates = Tensor({2}, 1.0);
  return p;
}

MtaParams MtaParams::random(std::size_t channels, std::size_t heads, std::mt19937_64& rng) {
  MtaParams p;
  p.adapter = Linear::random(channels, channels, rng);
  p.ego = MlpParams::random({12, channels, channels}, rng);
  p.attn = AttentionParams::random(channels, heads, rng);
  p.attn_out = ZeroConvParams::fresh(channels);
  p.motion_out = ZeroConvParams::fresh(channels);
  p.lmm = LmmParams::random(channels, rng);
  return p;
}

std::vector<double> pose_features(const Eigen::Matrix4d& pose) {
  if (!pose.allFinite()) throw NumericError("pose_features: non-finite transform");
  if (!is_rigid(pose)) throw Error("pose_features: transform is not rigid");
  std::vector<double> f;
  f.reserve(12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) f.push_back(pose(r, c));
  for (int r = 0; r < 3; ++r) f.push_back(pose(r, 3));
  return f;
}

namespace {

Tensor pose_matrix(const std::vector<Eigen::Matrix4d>& poses) {
  Tensor x({poses.size(), 12});
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto f = pose_features(poses[i]);
    std::copy(f.begin(), f.end(), x.data() + i * 12);
  }
  return x;
}

}  // namespace

Tensor ego_motion_embedding(const std::vector<Eigen::Matrix4d>& poses, const MlpParams& ego) {
  if (poses.empty()) throw ShapeError("ego_motion_embedding: no poses");
  if (ego.in_features() != 12) throw ShapeError("ego_motion_embedding: encoder must take 12 inputs");
  return mlp_forward(ego, pose_matrix(poses));
}

void ego_motion_embedding_backward(const std::vector<Eigen::Matrix4d>& poses,
                                   const MlpParams& ego, const Tensor& dy, MlpParams& grad) {
  mlp_backward(ego, pose_matrix(poses), dy, grad);
}

Tensor concat_time(const Tensor& a, const Tensor& b) {
  require_seq(a, "concat_time");
  require_seq(b, "concat_time");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2)) {
    throw ShapeError("concat_time: " + shape_string(a.dims()) + " vs " + shape_string(b.dims()));
  }
  const std::size_t n = a.dim(0), sa = a.dim(1), sb = b.dim(1), c = a.dim(2);
  Tensor out({n, sa + sb, c});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data() + i * sa * c, sa * c, out.data() + i * (sa + sb) * c);
    std::copy_n(b.data() + i * sb * c, sb * c, out.data() + (i * (sa + sb) + sa) * c);
  }
  return out;
}

Tensor slice_time(const Tensor& x, std::size_t first, std::size_t count) {
  require_seq(x, "slice_time");
  if (count == 0 || first + count > x.dim(1)) {
    throw ShapeError("slice_time: range [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") outside " + shape_string(x.dims()));
  }
  const std::size_t n = x.dim(0), s = x.dim(1), c = x.dim(2);
  Tensor out({n, count, c});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(x.data() + (i * s + first) * c, count * c, out.data() + i * count * c);
  }
  return out;
}

namespace {

struct LmmState {
  Tensor q, k, v, d0, d1, g0, g1, gate;
};

void check_lmm(const Tensor& z, const LmmParams& p) {
  require_seq(z, "local_motion");
  if (z.dim(2) != p.channels() || p.phi_q.in_features() != z.dim(2)) {
    throw ShapeError("local_motion: latent channels " + std::to_string(z.dim(2)) +
                     " vs module channels " + std::to_string(p.channels()));
  }
  if (p.gates.size() != 2) throw ShapeError("local_motion: expected two gate weights");
}

LmmState lmm_state(const Tensor& z, const LmmParams& p) {
  check_lmm(z, p);
  LmmState s;
  s.q = linear_forward(p.phi_q, z);
  s.k = linear_forward(p.phi_k, z);
  s.v = linear_forward(p.phi_v, z);
  const std::size_t n = z.dim(0), t_len = z.dim(1), c = z.dim(2);
  s.d0 = Tensor(z.dims());
  s.d1 = Tensor(z.dims());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::size_t row = (i * t_len + t) * c;
      for (std::size_t ch = 0; ch < c; ++ch) {
        if (t > 0) s.d0[row + ch] = s.q[row + ch] - s.k[row - c + ch];
        if (t + 1 < t_len) s.d1[row + ch] = s.q[row + ch] - s.k[row + c + ch];
      }
    }
  }
  s.g0 = temporal_block_forward(p.gamma_f, s.d0);
  s.g1 = temporal_block_forward(p.gamma_b, s.d1);
  s.gate = Tensor(z.dims());
  const double w0 = p.gates[0], w1 = p.gates[1];
  for (std::size_t i = 0; i < s.gate.size(); ++i) s.gate[i] = w0 * s.g0[i] + w1 * s.g1[i];
  return s;
}

}  // namespace

Tensor local_motion(const Tensor& latents, const LmmParams& p) {
  const LmmState s = lmm_state(latents, p);
  Tensor out(latents.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.gate[i] * s.v[i];
  return out;
}

Tensor local_motion_backward(const Tensor& latents, const LmmParams& p, const Tensor& dy,
                             LmmParams& grad) {
  const LmmState s = lmm_state(latents, p);
  require_shape(dy, latents.dims(), "local_motion_backward dy");
  const double w0 = p.gates[0], w1 = p.gates[1];
  Tensor dv(latents.dims()), dg0(latents.dims()), dg1(latents.dims());
  double dw0 = 0.0, dw1 = 0.0;
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const double dgate = dy[i] * s.v[i];
    dv[i] = dy[i] * s.gate[i];
    dw0 += dgate * s.g0[i];
    dw1 += dgate * s.g1[i];
    dg0[i] = w0 * dgate;
    dg1[i] = w1 * dgate;
  }
  grad.gates[0] += dw0;
  grad.gates[1] += dw1;
  const Tensor dd0 = temporal_block_backward(p.gamma_f, s.d0, dg0, grad.gamma_f);
  const Tensor dd1 = temporal_block_backward(p.gamma_b, s.d1, dg1, grad.gamma_b);

  const std::size_t n = latents.dim(0), t_len = latents.dim(1), c = latents.dim(2);
  Tensor dq(latents.dims()), dk(latents.dims());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::size_t row = (i * t_len + t) * c;
      for (std::size_t ch = 0; ch < c; ++ch) {
        if (t > 0) {
          dq[row + ch] += dd0[row + ch];
          dk[row - c + ch] -= dd0[row + ch];
        }
        if (t + 1 < t_len) {
          dq[row + ch] += dd1[row + ch];
          dk[row + c + ch] -= dd1[row + ch];
        }
      }
    }
  }
  Tensor dz = linear_backward(p.phi_q, latents, dq, grad.phi_q);
  add_in_place(dz, linear_backward(p.phi_k, latents, dk, grad.phi_k));
  add_in_place(dz, linear_backward(p.phi_v, latents, dv, grad.phi_v));
  return dz;
}

namespace {

struct MtaState {
  Tensor zmt;  // [phi(F_M), Z_T]
  Tensor x;    // zmt + delta(P_rel)
  Tensor s;    // SelfAttn(x)
  Tensor psi;
};

MtaState mta_state(const MotionBlock& b, const MtaParams& p) {
  b.validate();
  if (b.motion_frames() == 0) throw ShapeError("mta_forward: at least one motion frame required");
  if (b.channels() != p.channels()) {
    throw ShapeError("mta_forward: block channels " + std::to_string(b.channels()) +
                     " vs params " + std::to_string(p.channels()));
  }
  MtaState st;
  st.zmt = concat_time(linear_forward(p.adapter, b.motion), b.latents);
  const Tensor e = ego_motion_embedding(b.poses, p.ego);
  st.x = st.zmt;
  const std::size_t seq = st.zmt.dim(1), c = st.zmt.dim(2);
  for (std::size_t i = 0; i < st.x.dim(0); ++i) {
    for (std::size_t j = 0; j < seq * c; ++j) st.x[i * seq * c + j] += e[j];
  }
  st.s = self_attention(p.attn, st.x);
  st.psi = local_motion(b.latents, p.lmm);
  return st;
}

}  // namespace

Tensor mta_forward(const MotionBlock& block, const MtaParams& p) {
  const MtaState st = mta_state(block, p);
  const Tensor zbar = add(st.zmt, zero_conv(p.attn_out, st.s));
  return add(slice_time(zbar, block.motion_frames(), block.frames()),
             zero_conv(p.motion_out, st.psi));
}

MtaInputGradient mta_backward(const MotionBlock& block, const MtaParams& p, const Tensor& dy,
                              MtaParams& grad) {
  const MtaState st = mta_state(block, p);
  const std::size_t n = block.locations(), m = block.motion_frames(), t_len = block.frames(),
                    c = block.channels(), seq = m + t_len;
  require_shape(dy, {n, t_len, c}, "mta_backward dy");

  const Tensor dpsi = zero_conv_backward(p.motion_out, st.psi, dy, grad.motion_out);
  Tensor dz = local_motion_backward(block.latents, p.lmm, dpsi, grad.lmm);

  // Residual gradient of Zbar_MT: only the trailing T slots are consumed.
  Tensor dzbar({n, seq, c});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(dy.data() + i * t_len * c, t_len * c, dzbar.data() + (i * seq + m) * c);
  }
  const Tensor ds = zero_conv_backward(p.attn_out, st.s, dzbar, grad.attn_out);
  const Tensor dx = self_attention_backward(p.attn, st.x, ds, grad.attn);

  Tensor de({seq, c});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < seq * c; ++j) de[j] += dx[i * seq * c + j];
  }
  ego_motion_embedding_backward(block.poses, p.ego, de, grad.ego);

  const Tensor dzmt = add(dzbar, dx);
  const Tensor d_motion =
      linear_backward(p.adapter, block.motion, slice_time(dzmt, 0, m), grad.adapter);
  add_in_place(dz, slice_time(dzmt, m, t_len));
  return MtaInputGradient{std::move(dz), d_motion};
}

}  // namespace forge
