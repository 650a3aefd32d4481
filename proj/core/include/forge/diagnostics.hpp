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

// Self-checks exposed through the command line: the zero-init identity of
// motion-aware temporal attention and a finite-difference sweep over every
// differentiable block.

#include <cstdint>
#include <string>
#include <vector>

namespace forge {

struct IdentityProbe {
  std::size_t blocks = 0;
  double max_deviation = 0.0;  // max |mta_forward - Z_T| over all blocks
  bool bit_exact = true;
};

/// Random blocks with HW <= 64, M = 2, T = 7, C <= 64 and freshly
/// constructed zero convolutions.
IdentityProbe mta_identity_probe(std::size_t blocks, std::uint64_t seed);

struct GradientCase {
  std::string name;          // e.g. "mta_forward/params"
  std::size_t config = 0;
  std::size_t checked = 0;   // number of coordinates compared
  double max_rel_error = 0.0;
};

/// Analytic gradients of a weighted-sum loss against central differences for
/// local_motion, mta_forward, augmented_spatial_attention,
/// object_position_embedding and the camera / box / grid encoders, each on
/// `configs` random small configurations.
std::vector<GradientCase> gradient_sweep(std::size_t configs, std::uint64_t seed, double eps = 1e-5);

}  // namespace forge
