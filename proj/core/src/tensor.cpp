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

#include "forge/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <sstream>

#include "forge/errors.hpp"

namespace forge {
namespace {

std::atomic<std::int64_t> g_live{0};
std::atomic<std::int64_t> g_peak{0};

void bump_live() noexcept {
  const auto now = g_live.fetch_add(1, std::memory_order_relaxed) + 1;
  auto peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak &&
         !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void check_extents(const Shape& dims) {
  for (auto d : dims) {
    if (d == 0) throw ShapeError("tensor extents must be >= 1, got " + shape_string(dims));
  }
}

}  // namespace

std::size_t shape_size(const Shape& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string shape_string(const Shape& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ", ";
    os << dims[i];
  }
  os << ')';
  return os.str();
}

Tensor::LiveToken::LiveToken() noexcept { bump_live(); }
Tensor::LiveToken::LiveToken(const LiveToken&) noexcept { bump_live(); }
Tensor::LiveToken::LiveToken(LiveToken&&) noexcept { bump_live(); }
Tensor::LiveToken::~LiveToken() { g_live.fetch_sub(1, std::memory_order_relaxed); }

std::int64_t Tensor::live_count() noexcept { return g_live.load(); }
std::int64_t Tensor::peak_count() noexcept { return g_peak.load(); }
void Tensor::reset_peak() noexcept { g_peak.store(g_live.load()); }

Tensor::Tensor(Shape dims, double fill) : dims_(std::move(dims)) {
  check_extents(dims_);
  data_.assign(shape_size(dims_), fill);
}

Tensor::Tensor(Shape dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_extents(dims_);
  if (data_.size() != shape_size(dims_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match extents " + shape_string(dims_));
  }
}

Tensor Tensor::randn(Shape dims, std::mt19937_64& rng, double stddev) {
  Tensor t(std::move(dims));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data_) v = dist(rng);
  return t;
}

Tensor Tensor::uniform(Shape dims, std::mt19937_64& rng, double lo, double hi) {
  Tensor t(std::move(dims));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data_) v = dist(rng);
  return t;
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != dims_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) + " != tensor rank " +
                     std::to_string(dims_.size()));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= dims_[axis]) throw ShapeError("index out of range on axis " + std::to_string(axis));
    off = off * dims_[axis] + i;
    ++axis;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape dims) const {
  if (shape_size(dims) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(dims_) + " to " + shape_string(dims));
  }
  return Tensor(std::move(dims), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::identical(const Tensor& other) const {
  if (dims_ != other.dims_) return false;
  return data_.empty() ||
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.dims() != expected) {
    throw ShapeError(std::string(what) + ": expected " + shape_string(expected) + ", got " +
                     shape_string(t.dims()));
  }
}

namespace {
void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.dims()) + " vs " +
                     shape_string(b.dims()));
  }
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  require_same(a, b, "subtract");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (auto& v : out.values()) v *= s;
  return out;
}

void add_in_place(Tensor& acc, const Tensor& b) {
  require_same(acc, b, "add_in_place");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += b[i];
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (auto v : a.values()) s += v;
  return s;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Tensor slice_leading(const Tensor& a, std::size_t first, std::size_t count) {
  if (a.rank() == 0 || count == 0 || first + count > a.dim(0)) {
    throw ShapeError("slice_leading: range [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") outside " + shape_string(a.dims()));
  }
  Shape dims = a.dims();
  const std::size_t stride = a.size() / dims[0];
  dims[0] = count;
  std::vector<double> data(a.data() + first * stride, a.data() + (first + count) * stride);
  return Tensor(std::move(dims), std::move(data));
}

Tensor concat_leading(const Tensor& a, const Tensor& b) {
  if (a.rank() == 0 || a.rank() != b.rank() ||
      !std::equal(a.dims().begin() + 1, a.dims().end(), b.dims().begin() + 1)) {
    throw ShapeError("concat_leading: incompatible " + shape_string(a.dims()) + " and " +
                     shape_string(b.dims()));
  }
  Shape dims = a.dims();
  dims[0] += b.dim(0);
  std::vector<double> data(a.values().begin(), a.values().end());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor(std::move(dims), std::move(data));
}

}  // namespace forge
