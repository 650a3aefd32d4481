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

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "forge/errors.hpp"
#include "forge/frgt.hpp"

namespace forge {
namespace {

TEST(Frgt, HeaderLayoutIsMagicVersionDtypeRankExtents) {
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto bytes = encode_frgt(t);
  ASSERT_EQ(bytes.size(), 7u + 2 * 4 + 6 * 4);
  EXPECT_EQ(std::memcmp(bytes.data(), "FRGT", 4), 0);
  EXPECT_EQ(bytes[4], kFrgtVersion);
  EXPECT_EQ(bytes[5], kFrgtFloat32);
  EXPECT_EQ(bytes[6], 2);
  EXPECT_EQ(bytes[7], 2);  // little-endian extent
  EXPECT_EQ(bytes[11], 3);
  std::uint32_t first = 0;
  for (int i = 0; i < 4; ++i) first |= static_cast<std::uint32_t>(bytes[15 + i]) << (8 * i);
  EXPECT_EQ(std::bit_cast<float>(first), 1.0f);
}

TEST(Frgt, RoundTripIsBitExactForFloat32Values) {
  std::mt19937_64 rng(1);
  const Tensor q = quantize_f32(Tensor::randn({3, 4, 5}, rng));
  EXPECT_TRUE(decode_frgt(encode_frgt(q)).identical(q));
  std::stringstream ss;
  write_frgt(ss, q);
  EXPECT_TRUE(read_frgt(ss).identical(q));
}

TEST(Frgt, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "forge_frgt_test.frgt";
  const Tensor t = quantize_f32(Tensor({4}, {0.1, -2.5, 1e-3, 7.0}));
  save_frgt(path, t);
  EXPECT_TRUE(load_frgt(path).identical(t));
  std::filesystem::remove(path);
  EXPECT_THROW(load_frgt(path), Error);
}

TEST(Frgt, RejectsCorruptInput) {
  const auto good = encode_frgt(Tensor({2, 2}, 1.0));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_frgt(bad_magic), Error);
  auto bad_version = good;
  bad_version[4] = 99;
  EXPECT_THROW(decode_frgt(bad_version), Error);
  auto zero_extent = good;
  zero_extent[7] = 0;
  EXPECT_THROW(decode_frgt(zero_extent), Error);
  for (std::size_t n = 0; n < good.size(); ++n) {
    EXPECT_THROW(decode_frgt(std::span(good.data(), n)), Error) << "prefix " << n;
  }
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(decode_frgt(trailing), Error);
}

TEST(Frgt, EmptyTensorCannotBeEncoded) { EXPECT_THROW(encode_frgt(Tensor()), ShapeError); }

}  // namespace
}  // namespace forge
