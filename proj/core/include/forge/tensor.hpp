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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace forge {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& dims);
std::string shape_string(const Shape& dims);

/// Dense row-major tensor of 64-bit floats.
///
/// A default-constructed tensor is the empty placeholder (rank 0, no data);
/// every other tensor has extents >= 1 and exactly product(dims) values.
///
/// Every live Tensor object is counted so that pipelines can assert their
/// resident-tensor footprint stays bounded (see live_count / peak_count).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape dims, double fill = 0.0);
  Tensor(Shape dims, std::vector<double> data);

  static Tensor randn(Shape dims, std::mt19937_64& rng, double stddev = 1.0);
  static Tensor uniform(Shape dims, std::mt19937_64& rng, double lo, double hi);

  const Shape& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Bounds-checked multi-index access.
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Tensor reshaped(Shape dims) const;
  void fill(double value);

  /// Same extents and bit-identical payload.
  bool identical(const Tensor& other) const;
  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }

  static std::int64_t live_count() noexcept;
  static std::int64_t peak_count() noexcept;
  static void reset_peak() noexcept;

 private:
  struct LiveToken {
    LiveToken() noexcept;
    LiveToken(const LiveToken&) noexcept;
    LiveToken(LiveToken&&) noexcept;
    LiveToken& operator=(const LiveToken&) noexcept { return *this; }
    LiveToken& operator=(LiveToken&&) noexcept { return *this; }
    ~LiveToken();
  };

  Shape dims_;
  std::vector<double> data_;
  [[no_unique_address]] LiveToken token_;
};

// Elementwise helpers; all throw ShapeError on extent mismatch.
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
void add_in_place(Tensor& acc, const Tensor& b);
double sum(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(std::span<const double> values);

/// Copy `count` leading slices along axis 0 starting at `first`.
Tensor slice_leading(const Tensor& a, std::size_t first, std::size_t count);
/// Concatenate along axis 0.
Tensor concat_leading(const Tensor& a, const Tensor& b);

void require_shape(const Tensor& t, const Shape& expected, const char* what);

}  // namespace forge
