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

#include "forge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "forge/errors.hpp"

namespace forge {

std::vector<double> fourier_embed(std::span<const double> x, int bands) {
  if (bands < 1) throw ShapeError("fourier_embed: bands must be >= 1");
  if (!all_finite(x)) throw NumericError("fourier_embed: non-finite input");
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(bands) * x.size());
  for (double xi : x) {
    double freq = std::numbers::pi;
    for (int k = 0; k < bands; ++k) {
      out.push_back(std::sin(freq * xi));
      out.push_back(std::cos(freq * xi));
      freq *= 2.0;
    }
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double peak = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (auto& v : out) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : out) v /= total;
  return out;
}

// ---------------------------------------------------------------- Linear

Linear Linear::zeros(std::size_t in, std::size_t out) {
  return Linear{Tensor({out, in}), Tensor({out})};
}

Linear Linear::identity(std::size_t n) {
  Linear l = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) l.weight[i * n + i] = 1.0;
  return l;
}

Linear Linear::random(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return Linear{Tensor::randn({out, in}, rng, 1.0 / std::sqrt(static_cast<double>(in))),
                Tensor::randn({out}, rng, 0.1)};
}

namespace {

std::size_t rows_of(const Tensor& x, std::size_t features, const char* what) {
  if (x.rank() == 0 || x.dims().back() != features) {
    throw ShapeError(std::string(what) + ": last axis of " + shape_string(x.dims()) +
                     " must be " + std::to_string(features));
  }
  return x.size() / features;
}

Shape with_last(Shape dims, std::size_t last) {
  dims.back() = last;
  return dims;
}

void check_linear(const Linear& p) {
  if (p.weight.rank() != 2 || p.bias.rank() != 1 || p.bias.dim(0) != p.weight.dim(0)) {
    throw ShapeError("linear: malformed parameters " + shape_string(p.weight.dims()) + " / " +
                     shape_string(p.bias.dims()));
  }
}

}  // namespace

Tensor linear_forward(const Linear& p, const Tensor& x) {
  check_linear(p);
  const std::size_t in = p.in_features();
  const std::size_t out = p.out_features();
  const std::size_t rows = rows_of(x, in, "linear");
  Tensor y(with_last(x.dims(), out));
  const double* w = p.weight.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * in;
    double* yr = y.data() + r * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = w + o * in;
      double acc = p.bias[o];
      for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

Tensor linear_backward(const Linear& p, const Tensor& x, const Tensor& dy, Linear& grad) {
  const std::size_t in = p.in_features();
  const std::size_t out = p.out_features();
  const std::size_t rows = rows_of(x, in, "linear_backward");
  require_shape(dy, with_last(x.dims(), out), "linear_backward dy");
  Tensor dx(x.dims());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * in;
    const double* gr = dy.data() + r * out;
    double* dxr = dx.data() + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double g = gr[o];
      if (g == 0.0) continue;
      const double* wo = p.weight.data() + o * in;
      double* gw = grad.weight.data() + o * in;
      grad.bias[o] += g;
      for (std::size_t i = 0; i < in; ++i) {
        gw[i] += g * xr[i];
        dxr[i] += g * wo[i];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- MLP

MlpParams MlpParams::random(const std::vector<std::size_t>& widths, std::mt19937_64& rng) {
  if (widths.size() < 2) throw ShapeError("mlp: need at least input and output widths");
  MlpParams p;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    p.layers.push_back(Linear::random(widths[i], widths[i + 1], rng));
    p.activations.push_back(i + 2 < widths.size() ? Activation::kRelu : Activation::kNone);
  }
  return p;
}

void MlpParams::validate() const {
  if (layers.empty() || layers.size() != activations.size()) {
    throw ShapeError("mlp: layer / activation count mismatch");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    check_linear(layers[i]);
    if (i > 0 && layers[i].in_features() != layers[i - 1].out_features()) {
      throw ShapeError("mlp: layer " + std::to_string(i) + " does not chain");
    }
    if (!all_finite(layers[i].weight.values()) || !all_finite(layers[i].bias.values())) {
      throw NumericError("mlp: non-finite parameters in layer " + std::to_string(i));
    }
  }
}

namespace {

void apply_activation(Tensor& t, Activation a) {
  if (a == Activation::kRelu) {
    for (auto& v : t.values()) v = v > 0.0 ? v : 0.0;
  }
}

}  // namespace

Tensor mlp_forward(const MlpParams& p, const Tensor& x) {
  if (p.layers.empty()) throw ShapeError("mlp: no layers");
  Tensor h = x;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    h = linear_forward(p.layers[i], h);
    apply_activation(h, p.activations[i]);
  }
  return h;
}

std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> x) {
  if (x.empty()) throw ShapeError("mlp: empty input");
  Tensor in({x.size()}, std::vector<double>(x.begin(), x.end()));
  Tensor out = mlp_forward(p, in);
  return {out.values().begin(), out.values().end()};
}

Tensor mlp_backward(const MlpParams& p, const Tensor& x, const Tensor& dy, MlpParams& grad) {
  // Recompute the forward pass keeping every layer input.
  std::vector<Tensor> inputs;
  inputs.reserve(p.layers.size());
  std::vector<Tensor> pre;
  pre.reserve(p.layers.size());
  Tensor h = x;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    inputs.push_back(h);
    Tensor z = linear_forward(p.layers[i], h);
    pre.push_back(z);
    apply_activation(z, p.activations[i]);
    h = std::move(z);
  }
  require_shape(dy, h.dims(), "mlp_backward dy");
  Tensor g = dy;
  for (std::size_t i = p.layers.size(); i-- > 0;) {
    if (p.activations[i] == Activation::kRelu) {
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (!(pre[i][k] > 0.0)) g[k] = 0.0;
      }
    }
    g = linear_backward(p.layers[i], inputs[i], g, grad.layers[i]);
  }
  return g;
}

// ---------------------------------------------------------------- attention

AttentionParams AttentionParams::random(std::size_t channels, std::size_t heads,
                                        std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(channels));
  AttentionParams p;
  p.wq = Tensor::randn({channels, channels}, rng, s);
  p.wk = Tensor::randn({channels, channels}, rng, s);
  p.wv = Tensor::randn({channels, channels}, rng, s);
  p.wo = Tensor::randn({channels, channels}, rng, s);
  p.heads = heads;
  p.validate();
  return p;
}

void AttentionParams::validate() const {
  if (wq.rank() != 2) throw ShapeError("attention: wq must be a matrix");
  const std::size_t c = wq.dim(0);
  for (const Tensor* w : {&wq, &wk, &wv, &wo}) {
    require_shape(*w, {c, c}, "attention projection");
  }
  if (heads == 0 || c % heads != 0) {
    throw ShapeError("attention: channels " + std::to_string(c) + " not divisible by heads " +
                     std::to_string(heads));
  }
}

namespace {

// Y = X W^T for X (S, C) rows and W (C, C).
void project(const double* x, const Tensor& w, std::size_t s_len, std::size_t c, double* y) {
  for (std::size_t s = 0; s < s_len; ++s) {
    for (std::size_t o = 0; o < c; ++o) {
      const double* wo = w.data() + o * c;
      double acc = 0.0;
      for (std::size_t i = 0; i < c; ++i) acc += wo[i] * x[s * c + i];
      y[s * c + o] = acc;
    }
  }
}

// dW += dY^T X ; dX += dY W
void project_backward(const double* x, const Tensor& w, const double* dy, std::size_t s_len,
                      std::size_t c, Tensor& dw, double* dx) {
  for (std::size_t s = 0; s < s_len; ++s) {
    for (std::size_t o = 0; o < c; ++o) {
      const double g = dy[s * c + o];
      if (g == 0.0) continue;
      const double* wo = w.data() + o * c;
      double* dwo = dw.data() + o * c;
      for (std::size_t i = 0; i < c; ++i) {
        dwo[i] += g * x[s * c + i];
        dx[s * c + i] += g * wo[i];
      }
    }
  }
}

struct AttentionShape {
  std::size_t batch, seq, channels, heads, head_dim;
  double scale;
};

AttentionShape attention_shape(const AttentionParams& p, const Tensor& seq) {
  p.validate();
  if (seq.rank() != 3 || seq.dim(2) != p.channels()) {
    throw ShapeError("self_attention: expected (B, S, " + std::to_string(p.channels()) +
                     "), got " + shape_string(seq.dims()));
  }
  AttentionShape s{seq.dim(0), seq.dim(1), seq.dim(2), p.heads, seq.dim(2) / p.heads, 0.0};
  s.scale = 1.0 / std::sqrt(static_cast<double>(s.head_dim));
  return s;
}

// Softmax attention weights for one head: A (S, S).
void head_weights(const double* q, const double* k, const AttentionShape& sh, std::size_t h,
                  std::vector<double>& a) {
  const std::size_t n = sh.seq, c = sh.channels, d = sh.head_dim;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = a.data() + i * n;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t e = 0; e < d; ++e) acc += q[i * c + h * d + e] * k[j * c + h * d + e];
      row[j] = acc * sh.scale;
      peak = std::max(peak, row[j]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - peak);
      total += row[j];
    }
    for (std::size_t j = 0; j < n; ++j) row[j] /= total;
  }
}

}  // namespace

Tensor self_attention(const AttentionParams& p, const Tensor& seq) {
  const auto sh = attention_shape(p, seq);
  const std::size_t n = sh.seq, c = sh.channels, d = sh.head_dim;
  Tensor out(seq.dims());
  std::vector<double> q(n * c), k(n * c), v(n * c), o(n * c), a(n * n);
  for (std::size_t b = 0; b < sh.batch; ++b) {
    const double* x = seq.data() + b * n * c;
    project(x, p.wq, n, c, q.data());
    project(x, p.wk, n, c, k.data());
    project(x, p.wv, n, c, v.data());
    std::fill(o.begin(), o.end(), 0.0);
    for (std::size_t h = 0; h < sh.heads; ++h) {
      head_weights(q.data(), k.data(), sh, h, a);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double w = a[i * n + j];
          for (std::size_t e = 0; e < d; ++e) o[i * c + h * d + e] += w * v[j * c + h * d + e];
        }
      }
    }
    project(o.data(), p.wo, n, c, out.data() + b * n * c);
  }
  return out;
}

Tensor self_attention_backward(const AttentionParams& p, const Tensor& seq, const Tensor& dy,
                               AttentionParams& grad) {
  const auto sh = attention_shape(p, seq);
  require_shape(dy, seq.dims(), "self_attention_backward dy");
  const std::size_t n = sh.seq, c = sh.channels, d = sh.head_dim;
  Tensor dx(seq.dims());
  std::vector<double> q(n * c), k(n * c), v(n * c), o(n * c);
  std::vector<double> dq(n * c), dk(n * c), dv(n * c), dout(n * c);
  std::vector<double> a(n * n), da(n * n);
  for (std::size_t b = 0; b < sh.batch; ++b) {
    const double* x = seq.data() + b * n * c;
    const double* g = dy.data() + b * n * c;
    project(x, p.wq, n, c, q.data());
    project(x, p.wk, n, c, k.data());
    project(x, p.wv, n, c, v.data());
    std::fill(o.begin(), o.end(), 0.0);
    std::fill(dq.begin(), dq.end(), 0.0);
    std::fill(dk.begin(), dk.end(), 0.0);
    std::fill(dv.begin(), dv.end(), 0.0);
    std::fill(dout.begin(), dout.end(), 0.0);

    // Head outputs O feed the output-projection gradient.
    std::vector<std::vector<double>> weights(sh.heads, std::vector<double>(n * n));
    for (std::size_t h = 0; h < sh.heads; ++h) {
      head_weights(q.data(), k.data(), sh, h, weights[h]);
      const auto& w = weights[h];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t e = 0; e < d; ++e) o[i * c + h * d + e] += w[i * n + j] * v[j * c + h * d + e];
        }
      }
    }
    // Output projection.
    project_backward(o.data(), p.wo, g, n, c, grad.wo, dout.data());

    for (std::size_t h = 0; h < sh.heads; ++h) {
      const auto& w = weights[h];
      // dA = dO_h V_h^T ; dV_h = A^T dO_h
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t e = 0; e < d; ++e) {
            acc += dout[i * c + h * d + e] * v[j * c + h * d + e];
            dv[j * c + h * d + e] += w[i * n + j] * dout[i * c + h * d + e];
          }
          da[i * n + j] = acc;
        }
      }
      // Softmax backward, then logits -> q, k.
      for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) inner += da[i * n + j] * w[i * n + j];
        for (std::size_t j = 0; j < n; ++j) {
          const double dl = w[i * n + j] * (da[i * n + j] - inner) * sh.scale;
          if (dl == 0.0) continue;
          for (std::size_t e = 0; e < d; ++e) {
            dq[i * c + h * d + e] += dl * k[j * c + h * d + e];
            dk[j * c + h * d + e] += dl * q[i * c + h * d + e];
          }
        }
      }
    }
    double* dxb = dx.data() + b * n * c;
    project_backward(x, p.wq, dq.data(), n, c, grad.wq, dxb);
    project_backward(x, p.wk, dk.data(), n, c, grad.wk, dxb);
    project_backward(x, p.wv, dv.data(), n, c, grad.wv, dxb);
  }
  return dx;
}

// ---------------------------------------------------------------- zero conv

ZeroConvParams ZeroConvParams::fresh(std::size_t channels) {
  return ZeroConvParams{Linear::zeros(channels, channels)};
}

Tensor zero_conv(const ZeroConvParams& p, const Tensor& x) { return linear_forward(p.map, x); }

Tensor zero_conv_backward(const ZeroConvParams& p, const Tensor& x, const Tensor& dy,
                          ZeroConvParams& grad) {
  return linear_backward(p.map, x, dy, grad.map);
}

// ---------------------------------------------------------------- temporal conv

Conv1dParams Conv1dParams::random(std::size_t in, std::size_t out, std::size_t kernel,
                                  std::mt19937_64& rng) {
  if (kernel % 2 == 0) throw ShapeError("temporal conv kernel must be odd");
  const double s = 1.0 / std::sqrt(static_cast<double>(in * kernel));
  return Conv1dParams{Tensor::randn({out, in, kernel}, rng, s), Tensor::randn({out}, rng, 0.1)};
}

namespace {

struct Conv1dShape {
  std::size_t batch, time, in, out, kernel;
  long half;
};

Conv1dShape conv1d_shape(const Conv1dParams& p, const Tensor& x) {
  if (p.weight.rank() != 3 || p.weight.dim(2) % 2 == 0) {
    throw ShapeError("temporal conv: weight must be (out, in, odd kernel)");
  }
  require_shape(p.bias, {p.weight.dim(0)}, "temporal conv bias");
  if (x.rank() != 3 || x.dim(2) != p.weight.dim(1)) {
    throw ShapeError("temporal conv: expected (B, T, " + std::to_string(p.weight.dim(1)) +
                     "), got " + shape_string(x.dims()));
  }
  return {x.dim(0), x.dim(1), p.weight.dim(1), p.weight.dim(0), p.weight.dim(2),
          static_cast<long>(p.weight.dim(2) / 2)};
}

}  // namespace

Tensor temporal_conv(const Conv1dParams& p, const Tensor& x) {
  const auto s = conv1d_shape(p, x);
  Tensor y({s.batch, s.time, s.out});
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < s.time; ++t) {
      double* yr = y.data() + (b * s.time + t) * s.out;
      for (std::size_t o = 0; o < s.out; ++o) {
        double acc = p.bias[o];
        for (std::size_t k = 0; k < s.kernel; ++k) {
          const long src = static_cast<long>(t) + static_cast<long>(k) - s.half;
          if (src < 0 || src >= static_cast<long>(s.time)) continue;
          const double* xr = x.data() + (b * s.time + static_cast<std::size_t>(src)) * s.in;
          const double* w = p.weight.data() + o * s.in * s.kernel + k;
          for (std::size_t i = 0; i < s.in; ++i) acc += w[i * s.kernel] * xr[i];
        }
        yr[o] = acc;
      }
    }
  }
  return y;
}

Tensor temporal_conv_backward(const Conv1dParams& p, const Tensor& x, const Tensor& dy,
                              Conv1dParams& grad) {
  const auto s = conv1d_shape(p, x);
  require_shape(dy, {s.batch, s.time, s.out}, "temporal conv dy");
  Tensor dx(x.dims());
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < s.time; ++t) {
      const double* gr = dy.data() + (b * s.time + t) * s.out;
      for (std::size_t o = 0; o < s.out; ++o) {
        const double g = gr[o];
        grad.bias[o] += g;
        if (g == 0.0) continue;
        for (std::size_t k = 0; k < s.kernel; ++k) {
          const long src = static_cast<long>(t) + static_cast<long>(k) - s.half;
          if (src < 0 || src >= static_cast<long>(s.time)) continue;
          const std::size_t row = (b * s.time + static_cast<std::size_t>(src)) * s.in;
          const double* w = p.weight.data() + o * s.in * s.kernel + k;
          double* gw = grad.weight.data() + o * s.in * s.kernel + k;
          for (std::size_t i = 0; i < s.in; ++i) {
            gw[i * s.kernel] += g * x[row + i];
            dx[row + i] += g * w[i * s.kernel];
          }
        }
      }
    }
  }
  return dx;
}

TemporalConvBlock TemporalConvBlock::random(std::size_t channels, std::mt19937_64& rng) {
  return TemporalConvBlock{Conv1dParams::random(channels, channels, 3, rng),
                           Conv1dParams::random(channels, channels, 3, rng)};
}

Tensor temporal_block_forward(const TemporalConvBlock& p, const Tensor& x) {
  Tensor h = temporal_conv(p.first, x);
  apply_activation(h, Activation::kRelu);
  return temporal_conv(p.second, h);
}

Tensor temporal_block_backward(const TemporalConvBlock& p, const Tensor& x, const Tensor& dy,
                               TemporalConvBlock& grad) {
  const Tensor pre = temporal_conv(p.first, x);
  Tensor h = pre;
  apply_activation(h, Activation::kRelu);
  Tensor dh = temporal_conv_backward(p.second, h, dy, grad.second);
  for (std::size_t i = 0; i < dh.size(); ++i) {
    if (!(pre[i] > 0.0)) dh[i] = 0.0;
  }
  return temporal_conv_backward(p.first, x, dh, grad.first);
}

// ---------------------------------------------------------------- conv2d

Conv2dParams Conv2dParams::random(std::size_t in, std::size_t out, std::size_t kernel,
                                  std::size_t stride, std::size_t padding, std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(in * kernel * kernel));
  return Conv2dParams{Tensor::randn({out, in, kernel, kernel}, rng, s),
                      Tensor::randn({out}, rng, 0.1), stride, padding};
}

std::size_t Conv2dParams::output_extent(std::size_t input) const {
  const std::size_t padded = input + 2 * padding;
  if (padded < kernel()) throw ShapeError("conv2d: input smaller than kernel");
  return (padded - kernel()) / stride + 1;
}

namespace {

void check_conv2d(const Conv2dParams& p, const Tensor& x) {
  if (p.weight.rank() != 4 || p.weight.dim(2) != p.weight.dim(3) || p.stride == 0) {
    throw ShapeError("conv2d: weight must be (out, in, k, k) with stride >= 1");
  }
  require_shape(p.bias, {p.weight.dim(0)}, "conv2d bias");
  if (x.rank() != 3 || x.dim(0) != p.in_channels()) {
    throw ShapeError("conv2d: expected (" + std::to_string(p.in_channels()) + ", H, W), got " +
                     shape_string(x.dims()));
  }
}

}  // namespace

Tensor conv2d(const Conv2dParams& p, const Tensor& x) {
  check_conv2d(p, x);
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t ho = p.output_extent(h), wo = p.output_extent(w);
  const std::size_t kk = p.kernel(), cout = p.out_channels();
  const long pad = static_cast<long>(p.padding);
  Tensor y({cout, ho, wo});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) {
        double acc = p.bias[o];
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < kk; ++ky) {
            const long yy = static_cast<long>(i * p.stride + ky) - pad;
            if (yy < 0 || yy >= static_cast<long>(h)) continue;
            for (std::size_t kx = 0; kx < kk; ++kx) {
              const long xx = static_cast<long>(j * p.stride + kx) - pad;
              if (xx < 0 || xx >= static_cast<long>(w)) continue;
              acc += p.weight[((o * cin + c) * kk + ky) * kk + kx] *
                     x[(c * h + static_cast<std::size_t>(yy)) * w + static_cast<std::size_t>(xx)];
            }
          }
        }
        y[(o * ho + i) * wo + j] = acc;
      }
    }
  }
  return y;
}

Tensor conv2d_backward(const Conv2dParams& p, const Tensor& x, const Tensor& dy,
                       Conv2dParams& grad) {
  check_conv2d(p, x);
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t ho = p.output_extent(h), wo = p.output_extent(w);
  const std::size_t kk = p.kernel(), cout = p.out_channels();
  const long pad = static_cast<long>(p.padding);
  require_shape(dy, {cout, ho, wo}, "conv2d dy");
  Tensor dx(x.dims());
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) {
        const double g = dy[(o * ho + i) * wo + j];
        grad.bias[o] += g;
        if (g == 0.0) continue;
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < kk; ++ky) {
            const long yy = static_cast<long>(i * p.stride + ky) - pad;
            if (yy < 0 || yy >= static_cast<long>(h)) continue;
            for (std::size_t kx = 0; kx < kk; ++kx) {
              const long xx = static_cast<long>(j * p.stride + kx) - pad;
              if (xx < 0 || xx >= static_cast<long>(w)) continue;
              const std::size_t wi = ((o * cin + c) * kk + ky) * kk + kx;
              const std::size_t xi =
                  (c * h + static_cast<std::size_t>(yy)) * w + static_cast<std::size_t>(xx);
              grad.weight[wi] += g * x[xi];
              dx[xi] += g * p.weight[wi];
            }
          }
        }
      }
    }
  }
  return dx;
}

ConvStack ConvStack::downsample4(std::size_t in, std::size_t hidden, std::size_t out,
                                 std::mt19937_64& rng) {
  ConvStack s;
  s.layers.push_back(Conv2dParams::random(in, hidden, 3, 2, 1, rng));
  s.layers.push_back(Conv2dParams::random(hidden, out, 3, 2, 1, rng));
  return s;
}

Tensor conv_stack_forward(const ConvStack& p, const Tensor& x) {
  if (p.layers.empty()) throw ShapeError("conv stack: no layers");
  Tensor h = x;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    h = conv2d(p.layers[i], h);
    if (i + 1 < p.layers.size()) apply_activation(h, Activation::kRelu);
  }
  return h;
}

Tensor conv_stack_backward(const ConvStack& p, const Tensor& x, const Tensor& dy,
                           ConvStack& grad) {
  std::vector<Tensor> inputs;
  std::vector<Tensor> pre;
  Tensor h = x;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    inputs.push_back(h);
    Tensor z = conv2d(p.layers[i], h);
    pre.push_back(z);
    if (i + 1 < p.layers.size()) apply_activation(z, Activation::kRelu);
    h = std::move(z);
  }
  Tensor g = dy;
  for (std::size_t i = p.layers.size(); i-- > 0;) {
    if (i + 1 < p.layers.size()) {
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (!(pre[i][k] > 0.0)) g[k] = 0.0;
      }
    }
    g = conv2d_backward(p.layers[i], inputs[i], g, grad.layers[i]);
  }
  return g;
}

}  // namespace forge
