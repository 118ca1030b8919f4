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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nesschain/model.hpp"
#include "nesschain/observables.hpp"
#include "nesschain/rng.hpp"
#include "nesschain/simd/kernels.hpp"

namespace nesschain {

enum class Scheme { euler_maruyama, splitting };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& text);

struct IntegratorSpec {
  Scheme scheme = Scheme::splitting;
  double dt = 1e-3;
  double blow_up_threshold = 1e12;  // abort when G exceeds this

  bool operator==(const IntegratorSpec&) const = default;
};

/// Throws ConfigError unless dt > 0 and threshold > 0.
void validate_integrator(const IntegratorSpec& spec);

/// Deterministic part of the effective-coordinate equations of motion:
///   dq = p,  dp = -grad V_eff(q) + F Gamma s,  ds = -(Gamma s + F^T p)
/// with (F Gamma s)_b = lambda_b sqrt(gamma_b) s_b and
/// (F^T p)_b = lambda_b / sqrt(gamma_b) p_{site(b)}.
struct Drift {
  std::vector<double> dq;
  std::vector<double> dp;
  std::vector<double> ds;
};
Drift drift(const ChainConfig& config, const ChainState& state);

/// One integrator step driven by 2d standard normals (scaled internally).
/// Euler-Maruyama: explicit step with s-noise -sqrt(2 T dt) xi.
/// Splitting: half kick, half drift, exact OU update of s with p frozen,
/// half drift, half kick.
/// Throws BlowUpError on non-finite output or G above the threshold.
ChainState step(const ChainConfig& config, const IntegratorSpec& integrator, const ChainState& state,
                std::span<const double> increments);

/// In-place step without the blow-up check.
void advance(const ChainConfig& config, const IntegratorSpec& integrator, ChainState& state,
             std::span<const double> increments);

/// Momentum flip (s, q, p) -> (s, q, -p).
ChainState time_reversal_J(const ChainState& state);

struct RunLength {
  long steps = 0;
  long burn_in = 0;
  int batches = kDefaultBatches;
  long check_every = 64;  // blow-up check interval (finiteness checked every step)
};

/// Integrates one trajectory, streaming every left-endpoint state to the
/// observers. `state` holds the final state on return (also on blow-up, where
/// it holds the offending state). Step k uses increments
/// noise.gaussians(k, ...).
TrajectoryStats simulate(const ChainConfig& config, const IntegratorSpec& integrator, ChainState& state,
                         const RunLength& length, const NoiseStream& noise, std::span<Observer* const> observers = {});

// Memory-form coordinates (q, p, r): the bath enters through auxiliary forces r.

struct RawState {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> r;
};

RawState to_raw(const ChainConfig& config, const ChainState& state);
ChainState from_raw(const ChainConfig& config, const RawState& raw);

/// Euler-Maruyama step of
///   dq = p, dp_j = -grad_j V + r_b [j = site(b)],
///   dr_b = (-gamma_b r_b + lambda_b^2 gamma_b q_{site(b)}) dt - lambda_b sqrt(2 gamma_b T_b) dw_b.
void raw_euler_step(const ChainConfig& config, double dt, RawState& state, std::span<const double> increments);

struct DistanceSample {
  double time;
  double distance;      // Euclidean distance in (q, p, s)
  double log_distance;  // -inf when the trajectories coincide
};

/// Two trajectories driven by the identical noise realization.
std::vector<DistanceSample> synchronous_pair(const ChainConfig& config, const IntegratorSpec& integrator,
                                             ChainState a, ChainState b, long n_steps, const NoiseStream& noise,
                                             long record_every = 1);

/// Least-squares slope of log distance against time over samples with
/// t_min <= time <= t_max and distance > floor.
std::optional<double> fit_log_slope(std::span<const DistanceSample> samples, double t_min, double t_max,
                                    double floor = 0.0);

// Ensembles -----------------------------------------------------------------

struct EnsembleSpec {
  int trajectories = 1;
  std::uint64_t seed = 1;
  std::uint32_t first_stream = 0;  // trajectory i uses stream first_stream + i
  long burn_in_steps = 0;
  long steps = 0;                  // measured steps after burn-in
  std::vector<long> checkpoints;   // measured-step counts at which W is recorded
  IntegratorSpec integrator;
  std::optional<ChainState> initial;  // default: zero state
  int threads = 0;                    // 0: hardware concurrency
  long check_every = 256;
};

/// Per-trajectory results in trajectory order. Time averages are over the
/// measured steps.
struct EnsembleResult {
  std::vector<std::vector<double>> w_at;   // [checkpoint][trajectory]
  std::vector<std::vector<double>> ql_at;  // integral of phi_L, same layout
  std::vector<std::vector<double>> qr_at;  // integral of phi_R
  std::vector<double> phi_left;
  std::vector<double> phi_right;
  std::vector<double> sigma;
  std::vector<std::vector<double>> kinetic;  // [site][trajectory], |p_j|^2/d
  std::vector<ChainState> final_states;
  std::string kernel;
};

/// Runs independent trajectories through the batched kernels. Output does not
/// depend on the thread count or on which kernel variant runs.
EnsembleResult run_ensemble(const ChainConfig& config, const EnsembleSpec& spec,
                            const simd::KernelTable& kernels = simd::active_kernels());

}  // namespace nesschain
