// Copyright 2026 The nesschain Authors
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

#include "nesschain/rng.hpp"

#include "nesschain/simd/math.hpp"

namespace nesschain {

void NoiseStream::gaussians(std::uint64_t step, std::span<double> out) const {
  const auto key = philox::make_key(seed_);
  for (std::size_t g = 0; g < out.size(); g += 2) {
    const auto block = philox::generate(philox::make_counter(step, stream_, static_cast<std::uint32_t>(g / 2)), key);
    const auto [z0, z1] = simd::scalar_math::box_muller(block[0], block[1], block[2], block[3]);
    out[g] = z0;
    if (g + 1 < out.size()) out[g + 1] = z1;
  }
}

void NoiseStream::uniforms(std::uint64_t step, std::span<double> out) const {
  // Offset the block index so these never coincide with Gaussian blocks.
  constexpr std::uint32_t kUniformBlockBase = 0x80000000u;
  const auto key = philox::make_key(seed_);
  for (std::size_t g = 0; g < out.size(); g += 2) {
    const auto block = philox::generate(
        philox::make_counter(step, stream_, kUniformBlockBase + static_cast<std::uint32_t>(g / 2)), key);
    out[g] = simd::scalar_math::uniform_closed_open(block[0], block[1]);
    if (g + 1 < out.size()) out[g + 1] = simd::scalar_math::uniform_closed_open(block[2], block[3]);
  }
}

}  // namespace nesschain
