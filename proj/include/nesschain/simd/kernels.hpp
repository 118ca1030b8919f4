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

// Batched ensemble kernels. A Chunk advances kLanes independent trajectories
// in lockstep; every kernel exists as a portable scalar reference and, where
// the CPU allows, an AVX2 variant selected at runtime. All variants evaluate
// the same operation sequence per lane and agree bit for bit.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nesschain/model.hpp"

namespace nesschain::simd {

inline constexpr int kLanes = 4;

/// Per-step constants derived from a chain configuration and a time step.
/// Index b = 0 (left bath), 1 (right bath).
struct StepParams {
  int n = 0;
  int d = 0;
  double dt = 0.0;
  double half_dt = 0.0;
  std::vector<double> onsite_force;  // g(r2) = 2 dU/d(r2) as polynomial in r2
  std::vector<double> bond_force;
  std::array<double, 2> softening{};    // lambda^2, boundary term of V_eff
  std::array<double, 2> force_gain{};   // lambda sqrt(gamma): bath force on p
  std::array<double, 2> s_gain{};       // lambda / sqrt(gamma): momentum feed into s
  std::array<double, 2> gamma{};
  std::array<double, 2> inv_temperature{};
  std::array<double, 2> ou_decay{};     // exp(-gamma dt)
  std::array<double, 2> ou_momentum{};  // (1 - exp(-gamma dt)) s_gain / gamma
  std::array<double, 2> ou_noise{};     // sqrt(T (1 - exp(-2 gamma dt)) / gamma)
  std::array<double, 2> em_noise{};     // sqrt(2 T dt)

  static StepParams make(const ChainConfig& config, double dt);
  int gaussians_per_step() const noexcept { return 2 * d; }
};

/// kLanes trajectories in structure-of-arrays layout: element (var, lane) is
/// stored at var * kLanes + lane.
struct Chunk {
  int n = 0;
  int d = 0;
  std::vector<double> q, p, s;
  std::vector<double> force;  // scratch
  // Left-endpoint time integrals accumulated by the step kernels.
  std::vector<double> acc_w;    // integral of sigma
  std::vector<double> acc_ql;   // integral of phi_L
  std::vector<double> acc_qr;   // integral of phi_R
  std::vector<double> acc_kin;  // integral of |p_j|^2, [j * kLanes + lane]
  std::array<std::uint32_t, kLanes> streams{};

  Chunk(int sites, int dim);
  void reset_accumulators();
  ChainState lane_state(int lane) const;
  void set_lane_state(int lane, const ChainState& state);
};

using GaussianKernel = void (*)(std::uint64_t seed, const std::uint32_t* streams, std::uint64_t step, int count,
                                double* out);
using StepKernel = void (*)(const StepParams& params, Chunk& chunk, const double* noise);

/// One implementation of every batched kernel.
///  gaussians: out[g * kLanes + lane] = NoiseStream(seed, streams[lane]) increment g at `step`
///  split_step / em_step: one integrator step; noise laid out like `gaussians` output.
struct KernelTable {
  std::string_view name;
  GaussianKernel gaussians;
  StepKernel split_step;
  StepKernel em_step;
};

const KernelTable& scalar_kernels();
/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();
bool cpu_has_avx2();
/// Best kernel set for this CPU. The environment variable NESSCHAIN_SIMD
/// ("scalar" or "avx2") overrides the choice.
const KernelTable& active_kernels();

}  // namespace nesschain::simd
