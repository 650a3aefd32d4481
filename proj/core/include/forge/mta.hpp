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

// Motion-aware temporal attention over [motion frames | clip frames] with an
// ego-motion embedding, zero-initialized residual branches and the
// bidirectional local motion module.
//
// All sequence tensors are (HW, S, C): attention and convolutions run along
// the time axis S independently for every spatial location.

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "forge/geometry.hpp"
#include "forge/nn.hpp"
#include "forge/tensor.hpp"

namespace forge {

struct MotionBlock {
  Tensor motion;                      // F_M: (HW, M, C)
  Tensor latents;                     // Z_T: (HW, T, C)
  std::vector<Eigen::Matrix4d> poses;  // M + T relative transforms

  std::size_t locations() const { return latents.dim(0); }
  std::size_t motion_frames() const { return motion.dim(1); }
  std::size_t frames() const { return latents.dim(1); }
  std::size_t channels() const { return latents.dim(2); }
  void validate() const;
};

/// Identity for the first pose, then relative_pose(p[i-1], p[i]).
std::vector<Eigen::Matrix4d> relative_pose_chain(const std::vector<EgoPose>& poses);

struct LmmParams {
  Linear phi_q, phi_k, phi_v;      // C x C
  TemporalConvBlock gamma_f, gamma_b;
  Tensor gates;                    // {w0, w1}

  static LmmParams random(std::size_t channels, std::mt19937_64& rng);
  std::size_t channels() const { return phi_q.out_features(); }

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    Linear::visit(self.phi_q, prefixed("phi_q.", fn));
    Linear::visit(self.phi_k, prefixed("phi_k.", fn));
    Linear::visit(self.phi_v, prefixed("phi_v.", fn));
    TemporalConvBlock::visit(self.gamma_f, prefixed("gamma_f.", fn));
    TemporalConvBlock::visit(self.gamma_b, prefixed("gamma_b.", fn));
    fn(std::string("gates"), self.gates);
  }
};

struct MtaParams {
  Linear adapter;          // phi: C x C
  MlpParams ego;           // delta: 12 -> C -> C
  AttentionParams attn;
  ZeroConvParams attn_out;    // residual gate of the attention branch
  ZeroConvParams motion_out;  // residual gate of the local motion branch
  LmmParams lmm;

  /// Random weights everywhere except the two zero convolutions.
  static MtaParams random(std::size_t channels, std::size_t heads, std::mt19937_64& rng);
  std::size_t channels() const { return adapter.out_features(); }

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    Linear::visit(self.adapter, prefixed("adapter.", fn));
    MlpParams::visit(self.ego, prefixed("ego.", fn));
    AttentionParams::visit(self.attn, prefixed("attn.", fn));
    ZeroConvParams::visit(self.attn_out, prefixed("attn_out.", fn));
    ZeroConvParams::visit(self.motion_out, prefixed("motion_out.", fn));
    LmmParams::visit(self.lmm, prefixed("lmm.", fn));
  }
};

/// Flattened (R row-major, t) of one rigid transform.
std::vector<double> pose_features(const Eigen::Matrix4d& pose);

/// (S, C): one embedding row per transform. Throws on non-rigid input.
Tensor ego_motion_embedding(const std::vector<Eigen::Matrix4d>& poses, const MlpParams& ego);
void ego_motion_embedding_backward(const std::vector<Eigen::Matrix4d>& poses,
                                   const MlpParams& ego, const Tensor& dy, MlpParams& grad);

/// Psi(Z) = (w0 * gamma_f(d0) + w1 * gamma_b(d1)) * phi_v(Z), where
/// d0_t = phi_q(z_t) - phi_k(z_{t-1}) (zero at t = 0) and
/// d1_t = phi_q(z_t) - phi_k(z_{t+1}) (zero at t = T-1).
Tensor local_motion(const Tensor& latents, const LmmParams& p);
Tensor local_motion_backward(const Tensor& latents, const LmmParams& p, const Tensor& dy,
                             LmmParams& grad);

/// Z_MT = [phi(F_M), Z_T]
/// Zbar_MT = Z_MT + ZeroConv(SelfAttn(Z_MT + delta(P_rel)))
/// out = Zbar_MT[M:] + ZeroConv(Psi(Z_T))            -> (HW, T, C)
Tensor mta_forward(const MotionBlock& block, const MtaParams& p);

struct MtaInputGradient {
  Tensor d_latents;  // (HW, T, C)
  Tensor d_motion;   // (HW, M, C)
};

MtaInputGradient mta_backward(const MotionBlock& block, const MtaParams& p, const Tensor& dy,
                              MtaParams& grad);

/// Time-axis helpers on (B, S, C) tensors.
Tensor concat_time(const Tensor& a, const Tensor& b);
Tensor slice_time(const Tensor& x, std::size_t first, std::size_t count);

}  // namespace forge
