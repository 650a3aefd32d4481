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

// Portable binary tensor files.
//
//   bytes 0..3   magic "FRGT"
//   byte  4      version (1)
//   byte  5      dtype (0 = float32)
//   byte  6      ndim
//   then         ndim little-endian u32 extents
//   then         row-major little-endian float32 payload

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "forge/tensor.hpp"

namespace forge {

inline constexpr std::uint8_t kFrgtVersion = 1;
inline constexpr std::uint8_t kFrgtFloat32 = 0;

std::vector<std::uint8_t> encode_frgt(const Tensor& t);
Tensor decode_frgt(std::span<const std::uint8_t> bytes);

void write_frgt(std::ostream& os, const Tensor& t);
Tensor read_frgt(std::istream& is);

void save_frgt(const std::filesystem::path& path, const Tensor& t);
Tensor load_frgt(const std::filesystem::path& path);

/// Rounds every value through float32, i.e. what a save/load cycle yields.
Tensor quantize_f32(const Tensor& t);

}  // namespace forge
