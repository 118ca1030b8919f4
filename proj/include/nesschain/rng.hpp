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

#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace nesschain {

/// Philox4x32-10 block cipher (counter-based generator).
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr int kRounds = 10;

constexpr Counter round(const Counter& ctr, const Key& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
  return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
}

constexpr Counter generate(Counter ctr, Key key) {
  for (int i = 0; i < kRounds; ++i) {
    ctr = round(ctr, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Counter layout used throughout: (step lo, step hi, stream, block).
constexpr Counter make_counter(std::uint64_t step, std::uint32_t stream, std::uint32_t block) {
  return {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream, block};
}

constexpr Key make_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace philox

/// Gaussian increments for one trajectory. The increment with index g at
/// integer step k is a pure function of (master_seed, stream_index, k, g).
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, std::uint32_t stream_index)
      : seed_(master_seed), stream_(stream_index) {}

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint32_t stream_index() const noexcept { return stream_; }

  /// Fills out with standard normals for the given step. Block b yields the
  /// pair (out[2b], out[2b+1]).
  void gaussians(std::uint64_t step, std::span<double> out) const;

  /// Uniform doubles in [0,1) for the given step (two per block).
  void uniforms(std::uint64_t step, std::span<double> out) const;

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
};

}  // namespace nesschain
