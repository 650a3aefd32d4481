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

// Shared numerical building blocks with hand-derived backward passes.
//
// Every parameter bundle exposes a static `visit(self, fn)` that enumerates
// its tensors as (name, tensor) pairs in a fixed order. The generic helpers
// at the bottom of this header (flatten_params, assign_params, zeros_like)
// are built on it, and gradient bundles are simply parameter bundles of the
// same shape. Backward functions *accumulate* into the gradient bundle and
// return the gradient with respect to the input.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/tensor.hpp"

namespace forge {

template <class Fn>
auto prefixed(std::string prefix, Fn& fn) {
  return [prefix = std::move(prefix), &fn](const std::string& name, auto& t) {
    fn(prefix + name, t);
  };
}

/// [sin(2^k pi x_i), cos(2^k pi x_i)] for every component i, bands k = 0..L-1.
/// Layout: component-major, then band, then (sin, cos).
std::vector<double> fourier_embed(std::span<const double> x, int bands);

std::vector<double> softmax(std::span<const double> logits);

enum class Activation { kNone, kRelu };

struct Linear {
  Tensor weight;  // (out, in)
  Tensor bias;    // (out)

  static Linear zeros(std::size_t in, std::size_t out);
  static Linear identity(std::size_t n);
  static Linear random(std::size_t in, std::size_t out, std::mt19937_64& rng);

  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    fn(std::string("weight"), self.weight);
    fn(std::string("bias"), self.bias);
  }
};

/// Applies the affine map over the last axis of x: (..., in) -> (..., out).
Tensor linear_forward(const Linear& p, const Tensor& x);
Tensor linear_backward(const Linear& p, const Tensor& x, const Tensor& dy, Linear& grad);

struct MlpParams {
  std::vector<Linear> layers;
  std::vector<Activation> activations;

  /// widths = {in, hidden..., out}; relu on hidden layers, none on the last.
  static MlpParams random(const std::vector<std::size_t>& widths, std::mt19937_64& rng);

  std::size_t in_features() const { return layers.front().in_features(); }
  std::size_t out_features() const { return layers.back().out_features(); }
  void validate() const;

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    for (std::size_t i = 0; i < self.layers.size(); ++i) {
      Linear::visit(self.layers[i], prefixed("layers." + std::to_string(i) + ".", fn));
    }
  }
};

std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> x);
/// Row-batched form: (..., in) -> (..., out).
Tensor mlp_forward(const MlpParams& p, const Tensor& x);
Tensor mlp_backward(const MlpParams& p, const Tensor& x, const Tensor& dy, MlpParams& grad);

struct AttentionParams {
  Tensor wq, wk, wv, wo;  // (C, C) each
  std::size_t heads = 1;

  static AttentionParams random(std::size_t channels, std::size_t heads, std::mt19937_64& rng);

  std::size_t channels() const { return wq.dim(0); }
  void validate() const;

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    fn(std::string("wq"), self.wq);
    fn(std::string("wk"), self.wk);
    fn(std::string("wv"), self.wv);
    fn(std::string("wo"), self.wo);
  }
};

/// Multi-head scaled dot-product self-attention over axis 1 of (B, S, C).
/// Logits are scaled by 1/sqrt(C / heads).
Tensor self_attention(const AttentionParams& p, const Tensor& seq);
Tensor self_attention_backward(const AttentionParams& p, const Tensor& seq, const Tensor& dy,
                               AttentionParams& grad);

/// 1x1 channel-mixing convolution that starts as the zero map.
struct ZeroConvParams {
  Linear map;

  static ZeroConvParams fresh(std::size_t channels);

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    Linear::visit(self.map, fn);
  }
};

Tensor zero_conv(const ZeroConvParams& p, const Tensor& x);
Tensor zero_conv_backward(const ZeroConvParams& p, const Tensor& x, const Tensor& dy,
                          ZeroConvParams& grad);

/// 1-D convolution along axis 1 of (B, T, C), stride 1, zero padding.
struct Conv1dParams {
  Tensor weight;  // (out, in, kernel), kernel odd
  Tensor bias;    // (out)

  static Conv1dParams random(std::size_t in, std::size_t out, std::size_t kernel,
                             std::mt19937_64& rng);

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    fn(std::string("weight"), self.weight);
    fn(std::string("bias"), self.bias);
  }
};

Tensor temporal_conv(const Conv1dParams& p, const Tensor& x);
Tensor temporal_conv_backward(const Conv1dParams& p, const Tensor& x, const Tensor& dy,
                              Conv1dParams& grad);

/// conv -> relu -> conv along the time axis.
struct TemporalConvBlock {
  Conv1dParams first, second;

  static TemporalConvBlock random(std::size_t channels, std::mt19937_64& rng);

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    Conv1dParams::visit(self.first, prefixed("first.", fn));
    Conv1dParams::visit(self.second, prefixed("second.", fn));
  }
};

Tensor temporal_block_forward(const TemporalConvBlock& p, const Tensor& x);
Tensor temporal_block_backward(const TemporalConvBlock& p, const Tensor& x, const Tensor& dy,
                               TemporalConvBlock& grad);

/// 2-D convolution on a (C, H, W) grid.
struct Conv2dParams {
  Tensor weight;  // (out, in, k, k)
  Tensor bias;    // (out)
  std::size_t stride = 1;
  std::size_t padding = 0;

  static Conv2dParams random(std::size_t in, std::size_t out, std::size_t kernel,
                             std::size_t stride, std::size_t padding, std::mt19937_64& rng);

  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t kernel() const { return weight.dim(2); }
  std::size_t output_extent(std::size_t input) const;

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    fn(std::string("weight"), self.weight);
    fn(std::string("bias"), self.bias);
  }
};

Tensor conv2d(const Conv2dParams& p, const Tensor& x);
Tensor conv2d_backward(const Conv2dParams& p, const Tensor& x, const Tensor& dy,
                       Conv2dParams& grad);

/// Stack of 2-D convolutions with relu between layers (none after the last).
struct ConvStack {
  std::vector<Conv2dParams> layers;

  /// Two 3x3 stride-2 layers: in -> hidden -> out, spatial extent ceil(x / 4).
  static ConvStack downsample4(std::size_t in, std::size_t hidden, std::size_t out,
                               std::mt19937_64& rng);

  std::size_t in_channels() const { return layers.front().in_channels(); }
  std::size_t out_channels() const { return layers.back().out_channels(); }

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    for (std::size_t i = 0; i < self.layers.size(); ++i) {
      Conv2dParams::visit(self.layers[i], prefixed("layers." + std::to_string(i) + ".", fn));
    }
  }
};

Tensor conv_stack_forward(const ConvStack& p, const Tensor& x);
Tensor conv_stack_backward(const ConvStack& p, const Tensor& x, const Tensor& dy,
                           ConvStack& grad);

// ---- generic parameter-bundle helpers ----

template <class P>
std::size_t param_count(const P& p) {
  std::size_t n = 0;
  P::visit(p, [&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

template <class P>
std::vector<double> flatten_params(const P& p) {
  std::vector<double> out;
  P::visit(p, [&](const std::string&, const Tensor& t) {
    out.insert(out.end(), t.values().begin(), t.values().end());
  });
  return out;
}

template <class P>
void assign_params(P& p, std::span<const double> flat) {
  if (flat.size() != param_count(p)) {
    throw ShapeError("assign_params: got " + std::to_string(flat.size()) + " values for " +
                     std::to_string(param_count(p)) + " parameters");
  }
  std::size_t pos = 0;
  P::visit(p, [&](const std::string&, Tensor& t) {
    for (auto& v : t.values()) v = flat[pos++];
  });
}

template <class P>
P zeros_like(const P& p) {
  P out = p;
  P::visit(out, [](const std::string&, Tensor& t) { t.fill(0.0); });
  return out;
}

template <class P>
std::vector<std::string> param_names(const P& p) {
  std::vector<std::string> names;
  P::visit(p, [&](const std::string& name, const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) names.push_back(name + "[" + std::to_string(i) + "]");
  });
  return names;
}

}  // namespace forge
