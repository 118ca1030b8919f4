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

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "nesschain/observables.hpp"
#include "nesschain/rng.hpp"

namespace nesschain {

/// Galerkin truncation of the real Ginzburg-Landau equation on a periodic
/// domain,
///   du_k = [(1 - (k/L)^2) u_k - sum_{k1+k2+k3=k} u_k1 u_k2 u_k3] dt + q_k dw_k,
/// keeping modes |k| <= K. Only modes |k| > k_star are forced.
struct GLSpec {
  double L = 10.0;
  int K = 32;
  int k_star = 3;
  double noise_scale = 1.0;  // q_k = noise_scale * |k|^-5 for |k| > k_star
  double dt = 1e-2;
  std::uint64_t seed = 1;
  double blow_up_threshold = 1e8;  // on the l2 norm of u

  double linear_rate(int k) const noexcept { return 1.0 - (k / L) * (k / L); }
  double noise_amplitude(int k) const noexcept;
  /// Real Gaussians per step: real and imaginary parts of u_k, k = 1..K.
  int gaussians_per_step() const noexcept { return 2 * K; }

  bool operator==(const GLSpec&) const = default;
};

/// Throws ConfigError listing every violated invariant.
void validate_gl(const GLSpec& spec);

/// Modes k = -K..K stored at index k + K, with u_{-k} = conj(u_k).
struct GLState {
  int K = 0;
  std::vector<std::complex<double>> u;

  static GLState zero(int K);
  std::complex<double>& at(int k) { return u[static_cast<std::size_t>(k + K)]; }
  const std::complex<double>& at(int k) const { return u[static_cast<std::size_t>(k + K)]; }
  /// Sets u_{-k} = conj(u_k) and Im u_0 = 0 exactly.
  void enforce_reality();
  bool is_real_field() const noexcept;
  double norm() const noexcept;
};

/// Truncated cubic term sum_{k1+k2+k3=k, |ki| <= K} u_k1 u_k2 u_k3 for |k| <= K,
/// by two discrete convolutions.
std::vector<std::complex<double>> gl_cubic(const GLState& state);
/// Deterministic part of the right-hand side.
GLState gl_drift(const GLSpec& spec, const GLState& state);

/// Increments q_k dW_k for k = -K..K at the given step. Real and imaginary
/// parts of each forced mode k > 0 receive independent N(0, dt) draws; modes
/// with |k| <= k_star receive exactly zero.
GLState gl_noise_increment(const GLSpec& spec, const NoiseStream& noise, std::uint64_t step);

/// Semi-implicit step: linear term implicit, cubic explicit,
///   u_k <- (u_k - dt C_k + dW_k) / (1 - dt (1 - (k/L)^2)).
/// Throws BlowUpError when the norm exceeds the threshold or turns non-finite.
GLState gl_step(const GLSpec& spec, const GLState& state, const GLState& increment);

struct GLSample {
  double time;
  double distance;          // ||u_a - u_b||
  double low_mode_energy;   // |u_1|^2 of trajectory a
  double low_mode_energy_b;
};

/// Two trajectories driven by identical noise (stream `stream`).
std::vector<GLSample> gl_synchronization_test(const GLSpec& spec, GLState a, GLState b, long n_steps,
                                              long record_every = 1, std::uint32_t stream = 0);

/// Batch-means estimate of <|u_1|^2> along one trajectory after burn_in steps.
Estimate gl_low_mode_average(const GLSpec& spec, GLState state, long burn_in, long n_steps, std::uint32_t stream,
                             int n_batches = kDefaultBatches);

/// Random initial state: u_0 uniform in [u0_lo, u0_hi], modes 1..K with
/// independent uniform real and imaginary parts scaled by amplitude / k.
GLState gl_random_state(int K, const NoiseStream& source, double u0_lo, double u0_hi, double amplitude);

}  // namespace nesschain
