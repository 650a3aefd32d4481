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

#include "forge/frgt.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "forge/errors.hpp"

namespace forge {
namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'R', 'G', 'T'};
constexpr std::size_t kHeader = 7;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_frgt(const Tensor& t) {
  if (t.rank() == 0 || t.rank() > std::numeric_limits<std::uint8_t>::max()) {
    throw ShapeError("frgt: rank must be in [1, 255], got " + std::to_string(t.rank()));
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kFrgtVersion);
  out.push_back(kFrgtFloat32);
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw ShapeError("frgt: extent exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  out.reserve(out.size() + 4 * t.size());
  for (double v : t.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Tensor decode_frgt(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error("frgt: bad magic or truncated header");
  }
  if (bytes[4] != kFrgtVersion) throw Error("frgt: unsupported version " + std::to_string(bytes[4]));
  if (bytes[5] != kFrgtFloat32) throw Error("frgt: unsupported dtype " + std::to_string(bytes[5]));
  const std::size_t ndim = bytes[6];
  if (ndim == 0) throw Error("frgt: zero-rank tensor");
  if (bytes.size() < kHeader + 4 * ndim) throw Error("frgt: truncated extents");
  Shape dims(ndim);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    dims[i] = get_u32(bytes.data() + kHeader + 4 * i);
    if (dims[i] == 0) throw Error("frgt: zero extent on axis " + std::to_string(i));
    count *= dims[i];
  }
  const std::size_t payload = kHeader + 4 * ndim;
  if (bytes.size() != payload + 4 * count) {
    throw Error("frgt: payload holds " + std::to_string(bytes.size() - payload) +
                " bytes, expected " + std::to_string(4 * count));
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + payload + 4 * i));
  }
  return Tensor(std::move(dims), std::move(data));
}

void write_frgt(std::ostream& os, const Tensor& t) {
  const auto bytes = encode_frgt(t);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("frgt: write failed");
}

Tensor read_frgt(std::istream& is) {
  std::uint8_t header[kHeader];
  if (!is.read(reinterpret_cast<char*>(header), kHeader)) throw Error("frgt: truncated header");
  std::vector<std::uint8_t> bytes(header, header + kHeader);
  const std::size_t ndim = header[6];
  bytes.resize(kHeader + 4 * ndim);
  if (!is.read(reinterpret_cast<char*>(bytes.data() + kHeader), static_cast<std::streamsize>(4 * ndim))) {
    throw Error("frgt: truncated extents");
  }
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) count *= get_u32(bytes.data() + kHeader + 4 * i);
  const std::size_t start = bytes.size();
  bytes.resize(start + 4 * count);
  if (!is.read(reinterpret_cast<char*>(bytes.data() + start), static_cast<std::streamsize>(4 * count))) {
    throw Error("frgt: truncated payload");
  }
  return decode_frgt(bytes);
}

void save_frgt(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("frgt: cannot open " + path.string() + " for writing");
  write_frgt(os, t);
}

Tensor load_frgt(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("frgt: cannot open " + path.string());
  return read_frgt(is);
}

Tensor quantize_f32(const Tensor& t) {
  Tensor out = t;
  for (auto& v : out.values()) v = static_cast<float>(v);
  return out;
}

}  // namespace forge
