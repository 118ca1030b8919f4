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

#include "nesschain/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nesschain/errors.hpp"
#include "nesschain/parallel.hpp"

namespace nesschain {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::euler_maruyama ? "euler_maruyama" : "splitting";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "euler_maruyama" || text == "em") return Scheme::euler_maruyama;
  if (text == "splitting") return Scheme::splitting;
  throw std::invalid_argument("unknown scheme '" + text + "' (expected euler_maruyama or splitting)");
}

void validate_integrator(const IntegratorSpec& spec) {
  std::vector<std::string> bad;
  if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) bad.push_back("dt must be finite and > 0");
  if (!(spec.blow_up_threshold > 0.0)) bad.push_back("blow_up_threshold must be > 0");
  if (!bad.empty()) throw ConfigError(bad);
}

namespace {

void check_state_shape(const ChainConfig& config, const ChainState& state) {
  if (static_cast<int>(state.q.size()) != config.dof() || static_cast<int>(state.p.size()) != config.dof() ||
      static_cast<int>(state.s.size()) != config.bath_dof()) {
    throw DimensionError("state shape does not match the chain (n*d positions/momenta, 2d bath variables)");
  }
}

// Reference single-trajectory integrator. Coefficients are shared with the
// batched kernels; forces go through the model's gradient routine.
class Stepper {
 public:
  Stepper(const ChainConfig& config, const IntegratorSpec& integrator)
      : config_(config),
        integrator_(integrator),
        params_(simd::StepParams::make(config, integrator.dt)),
        force_(static_cast<std::size_t>(config.dof())) {}

  void advance(ChainState& st, std::span<const double> xi) {
    if (static_cast<int>(xi.size()) != config_.bath_dof()) {
      throw DimensionError("step needs " + std::to_string(config_.bath_dof()) + " noise increments");
    }
    if (integrator_.scheme == Scheme::euler_maruyama) {
      euler(st, xi);
    } else {
      split(st, xi);
    }
  }

  void check(const ChainState& st, long step) const {
    if (!st.is_finite()) throw BlowUpError("state became non-finite", step, st.flatten());
    const double g = energy_G(config_, st);
    if (g > integrator_.blow_up_threshold) {
      std::ostringstream os;
      os << "energy G = " << g << " exceeded blow-up threshold " << integrator_.blow_up_threshold;
      throw BlowUpError(os.str(), step, st.flatten());
    }
  }

 private:
  void compute_force(const ChainState& st) {
    effective_potential_grad(config_, st.q, force_);
    for (double& f : force_) f = -f;
    const auto d = static_cast<std::size_t>(config_.d);
    for (int b = 0; b < 2; ++b) {
      const auto site = static_cast<std::size_t>(boundary_site(config_, static_cast<Bath>(b))) * d;
      for (std::size_t c = 0; c < d; ++c) force_[site + c] += params_.force_gain[b] * st.s[b * d + c];
    }
  }

  void euler(ChainState& st, std::span<const double> xi) {
    const double dt = params_.dt;
    const auto d = static_cast<std::size_t>(config_.d);
    compute_force(st);
    for (int b = 0; b < 2; ++b) {
      const auto site = static_cast<std::size_t>(boundary_site(config_, static_cast<Bath>(b))) * d;
      for (std::size_t c = 0; c < d; ++c) {
        double& s = st.s[b * d + c];
        const double rate = -(params_.gamma[b] * s) - params_.s_gain[b] * st.p[site + c];
        s = (s + dt * rate) - params_.em_noise[b] * xi[b * d + c];
      }
    }
    for (std::size_t i = 0; i < st.q.size(); ++i) st.q[i] += dt * st.p[i];
    for (std::size_t i = 0; i < st.p.size(); ++i) st.p[i] += dt * force_[i];
  }

  void split(ChainState& st, std::span<const double> xi) {
    const double h = params_.half_dt;
    const auto d = static_cast<std::size_t>(config_.d);
    compute_force(st);
    for (std::size_t i = 0; i < st.p.size(); ++i) st.p[i] += h * force_[i];
    for (std::size_t i = 0; i < st.q.size(); ++i) st.q[i] += h * st.p[i];
    for (int b = 0; b < 2; ++b) {
      const auto site = static_cast<std::size_t>(boundary_site(config_, static_cast<Bath>(b))) * d;
      for (std::size_t c = 0; c < d; ++c) {
        double& s = st.s[b * d + c];
        s = (params_.ou_decay[b] * s - params_.ou_momentum[b] * st.p[site + c]) - params_.ou_noise[b] * xi[b * d + c];
      }
    }
    for (std::size_t i = 0; i < st.q.size(); ++i) st.q[i] += h * st.p[i];
    compute_force(st);
    for (std::size_t i = 0; i < st.p.size(); ++i) st.p[i] += h * force_[i];
  }

  const ChainConfig& config_;
  IntegratorSpec integrator_;
  simd::StepParams params_;
  std::vector<double> force_;
};

}  // namespace

Drift drift(const ChainConfig& config, const ChainState& state) {
  check_state_shape(config, state);
  if (!state.is_finite()) throw std::domain_error("drift: state has non-finite entries");
  const auto d = static_cast<std::size_t>(config.d);
  Drift out;
  out.dq = state.p;
  out.dp.assign(state.p.size(), 0.0);
  effective_potential_grad(config, state.q, out.dp);
  for (double& v : out.dp) v = -v;
  out.ds.assign(state.s.size(), 0.0);
  for (int b = 0; b < 2; ++b) {
    const auto& r = reservoir(config, static_cast<Bath>(b));
    const auto site = static_cast<std::size_t>(boundary_site(config, static_cast<Bath>(b))) * d;
    const double sg = std::sqrt(r.gamma);
    for (std::size_t c = 0; c < d; ++c) {
      out.dp[site + c] += r.lambda * sg * state.s[b * d + c];
      out.ds[b * d + c] = -(r.gamma * state.s[b * d + c] + (r.lambda / sg) * state.p[site + c]);
    }
  }
  return out;
}

void advance(const ChainConfig& config, const IntegratorSpec& integrator, ChainState& state,
             std::span<const double> increments) {
  check_state_shape(config, state);
  Stepper(config, integrator).advance(state, increments);
}

ChainState step(const ChainConfig& config, const IntegratorSpec& integrator, const ChainState& state,
                std::span<const double> increments) {
  check_state_shape(config, state);
  Stepper stepper(config, integrator);
  ChainState next = state;
  stepper.advance(next, increments);
  stepper.check(next, 1);
  return next;
}

ChainState time_reversal_J(const ChainState& state) {
  ChainState out = state;
  for (double& v : out.p) v = -v;
  return out;
}

TrajectoryStats simulate(const ChainConfig& config, const IntegratorSpec& integrator, ChainState& state,
                         const RunLength& length, const NoiseStream& noise, std::span<Observer* const> observers) {
  check_state_shape(config, state);
  validate_integrator(integrator);
  const double dt = integrator.dt;
  Stepper stepper(config, integrator);
  StatsObserver stats(length.burn_in, length.batches);
  stats.begin(config, length.steps, dt);
  for (Observer* o : observers) o->begin(config, length.steps, dt);
  std::vector<double> xi(static_cast<std::size_t>(config.bath_dof()));
  const long check_every = std::max(1L, length.check_every);
  for (long k = 0; k < length.steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const FluxSample f = flux(config, state);
    stats.observe(k, t, state, f);
    for (Observer* o : observers) o->observe(k, t, state, f);
    noise.gaussians(static_cast<std::uint64_t>(k), xi);
    stepper.advance(state, xi);
    if ((k + 1) % check_every == 0 || k + 1 == length.steps) {
      stepper.check(state, k + 1);
    } else if (!state.is_finite()) {
      throw BlowUpError("state became non-finite", k + 1, state.flatten());
    }
  }
  const double t_end = static_cast<double>(length.steps) * dt;
  stats.end(length.steps, t_end, state);
  for (Observer* o : observers) o->end(length.steps, t_end, state);
  return stats.stats();
}

RawState to_raw(const ChainConfig& config, const ChainState& state) {
  check_state_shape(config, state);
  return {state.q, state.p, s_to_r(config, state.s, state.q)};
}

ChainState from_raw(const ChainConfig& config, const RawState& raw) {
  return {raw.q, raw.p, r_to_s(config, raw.r, raw.q)};
}

void raw_euler_step(const ChainConfig& config, double dt, RawState& st, std::span<const double> increments) {
  const auto d = static_cast<std::size_t>(config.d);
  std::vector<double> force = chain_potential_grad(config, st.q);
  for (double& f : force) f = -f;
  for (int b = 0; b < 2; ++b) {
    const auto site = static_cast<std::size_t>(boundary_site(config, static_cast<Bath>(b))) * d;
    for (std::size_t c = 0; c < d; ++c) force[site + c] += st.r[b * d + c];
  }
  for (int b = 0; b < 2; ++b) {
    const auto& res = reservoir(config, static_cast<Bath>(b));
    const auto site = static_cast<std::size_t>(boundary_site(config, static_cast<Bath>(b))) * d;
    const double amp = res.lambda * std::sqrt(2.0 * res.gamma * res.temperature * dt);
    for (std::size_t c = 0; c < d; ++c) {
      double& r = st.r[b * d + c];
      const double rate = -res.gamma * r + res.lambda * res.lambda * res.gamma * st.q[site + c];
      r = (r + dt * rate) - amp * increments[b * d + c];
    }
  }
  for (std::size_t i = 0; i < st.q.size(); ++i) st.q[i] += dt * st.p[i];
  for (std::size_t i = 0; i < st.p.size(); ++i) st.p[i] += dt * force[i];
}

namespace {

double distance(const ChainState& a, const ChainState& b) {
  double acc = 0.0;
  auto add = [&acc](const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
  };
  add(a.q, b.q);
  add(a.p, b.p);
  add(a.s, b.s);
  return std::sqrt(acc);
}

DistanceSample make_sample(double t, const ChainState& a, const ChainState& b) {
  const double dist = distance(a, b);
  return {t, dist, dist > 0.0 ? std::log(dist) : -std::numeric_limits<double>::infinity()};
}

}  // namespace

std::vector<DistanceSample> synchronous_pair(const ChainConfig& config, const IntegratorSpec& integrator,
                                             ChainState a, ChainState b, long n_steps, const NoiseStream& noise,
                                             long record_every) {
  check_state_shape(config, a);
  check_state_shape(config, b);
  validate_integrator(integrator);
  record_every = std::max(1L, record_every);
  Stepper stepper(config, integrator);
  std::vector<double> xi(static_cast<std::size_t>(config.bath_dof()));
  std::vector<DistanceSample> out;
  out.push_back(make_sample(0.0, a, b));
  for (long k = 0; k < n_steps; ++k) {
    noise.gaussians(static_cast<std::uint64_t>(k), xi);
    stepper.advance(a, xi);
    stepper.advance(b, xi);
    if ((k + 1) % 64 == 0 || k + 1 == n_steps) {
      stepper.check(a, k + 1);
      stepper.check(b, k + 1);
    }
    if ((k + 1) % record_every == 0 || k + 1 == n_steps) {
      out.push_back(make_sample(static_cast<double>(k + 1) * integrator.dt, a, b));
    }
  }
  return out;
}

std::optional<double> fit_log_slope(std::span<const DistanceSample> samples, double t_min, double t_max,
                                    double floor) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    if (s.time < t_min || s.time > t_max || !(s.distance > floor)) continue;
    n += 1;
    sx += s.time;
    sy += s.log_distance;
    sxx += s.time * s.time;
    sxy += s.time * s.log_distance;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den <= 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

EnsembleResult run_ensemble(const ChainConfig& config, const EnsembleSpec& spec, const simd::KernelTable& kernels) {
  validate_integrator(spec.integrator);
  if (spec.trajectories < 1) throw ConfigError("ensemble needs at least one trajectory");
  if (spec.initial) check_state_shape(config, *spec.initial);
  std::vector<long> checkpoints = spec.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  for (long c : checkpoints) {
    if (c < 1 || c > spec.steps) throw ConfigError("checkpoint outside the measured range");
  }

  const int total = spec.trajectories;
  const int n_chunks = (total + simd::kLanes - 1) / simd::kLanes;
  const simd::StepParams params = simd::StepParams::make(config, spec.integrator.dt);
  const auto step_kernel = spec.integrator.scheme == Scheme::splitting ? kernels.split_step : kernels.em_step;
  const ChainState init = spec.initial ? *spec.initial : ChainState::zero(config);
  const double measured_time = static_cast<double>(spec.steps) * spec.integrator.dt;

  EnsembleResult res;
  res.kernel = std::string(kernels.name);
  res.w_at.assign(checkpoints.size(), std::vector<double>(static_cast<std::size_t>(total)));
  res.ql_at = res.w_at;
  res.qr_at = res.w_at;
  res.phi_left.resize(static_cast<std::size_t>(total));
  res.phi_right.resize(static_cast<std::size_t>(total));
  res.sigma.resize(static_cast<std::size_t>(total));
  res.kinetic.assign(static_cast<std::size_t>(config.n), std::vector<double>(static_cast<std::size_t>(total)));
  res.final_states.resize(static_cast<std::size_t>(total));

  parallel_for(static_cast<std::size_t>(n_chunks), spec.threads, [&](std::size_t chunk_index) {
    simd::Chunk ch(config.n, config.d);
    const int base = static_cast<int>(chunk_index) * simd::kLanes;
    for (int l = 0; l < simd::kLanes; ++l) {
      ch.streams[l] = spec.first_stream + static_cast<std::uint32_t>(base + l);
      ch.set_lane_state(l, init);
    }
    const int lanes = std::min(simd::kLanes, total - base);
    const int per_step = params.gaussians_per_step();
    std::vector<double> noise(static_cast<std::size_t>(per_step * simd::kLanes));
    const long total_steps = spec.burn_in_steps + spec.steps;
    std::size_t next_cp = 0;
    for (long k = 0; k < total_steps; ++k) {
      if (k == spec.burn_in_steps) ch.reset_accumulators();
      kernels.gaussians(spec.seed, ch.streams.data(), static_cast<std::uint64_t>(k), per_step, noise.data());
      step_kernel(params, ch, noise.data());
      const long measured = k + 1 - spec.burn_in_steps;
      while (next_cp < checkpoints.size() && measured == checkpoints[next_cp]) {
        for (int l = 0; l < lanes; ++l) {
          const auto i = static_cast<std::size_t>(base + l);
          res.w_at[next_cp][i] = ch.acc_w[l];
          res.ql_at[next_cp][i] = ch.acc_ql[l];
          res.qr_at[next_cp][i] = ch.acc_qr[l];
        }
        ++next_cp;
      }
      if ((k + 1) % spec.check_every == 0 || k + 1 == total_steps) {
        for (int l = 0; l < lanes; ++l) {
          const ChainState st = ch.lane_state(l);
          if (!st.is_finite() || energy_G(config, st) > spec.integrator.blow_up_threshold) {
            throw BlowUpError("ensemble trajectory " + std::to_string(base + l) + " blew up", k + 1, st.flatten());
          }
        }
      }
    }
    for (int l = 0; l < lanes; ++l) {
      const auto i = static_cast<std::size_t>(base + l);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      res.phi_left[i] = spec.steps > 0 ? ch.acc_ql[l] / measured_time : nan;
      res.phi_right[i] = spec.steps > 0 ? ch.acc_qr[l] / measured_time : nan;
      res.sigma[i] = spec.steps > 0 ? ch.acc_w[l] / measured_time : nan;
      for (int j = 0; j < config.n; ++j) {
        res.kinetic[j][i] = spec.steps > 0 ? ch.acc_kin[j * simd::kLanes + l] / measured_time / config.d : nan;
      }
      res.final_states[i] = ch.lane_state(l);
    }
  });
  return res;
}

}  // namespace nesschain
