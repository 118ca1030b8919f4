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

#include "nesschain/spde_gl.hpp"

#include <cmath>
#include <sstream>

#include "nesschain/errors.hpp"

namespace nesschain {

double GLSpec::noise_amplitude(int k) const noexcept {
  const int a = std::abs(k);
  if (a <= k_star) return 0.0;
  return noise_scale * std::pow(static_cast<double>(a), -5.0);
}

void validate_gl(const GLSpec& spec) {
  std::vector<std::string> bad;
  if (!(spec.L > 0.0)) bad.push_back("L must be > 0");
  if (spec.k_star < 0) bad.push_back("k_star must be >= 0");
  if (spec.K <= spec.k_star) bad.push_back("K must exceed k_star");
  if (!(spec.noise_scale >= 0.0)) bad.push_back("noise_scale must be >= 0");
  if (!(spec.dt > 0.0)) bad.push_back("dt must be > 0");
  // The implicit denominator 1 - dt (1 - (k/L)^2) must stay positive.
  if (spec.dt >= 1.0) bad.push_back("dt must be < 1 for the semi-implicit step");
  if (!(spec.blow_up_threshold > 0.0)) bad.push_back("blow_up_threshold must be > 0");
  if (!bad.empty()) throw ConfigError(bad);
}

GLState GLState::zero(int K) {
  GLState s;
  s.K = K;
  s.u.assign(static_cast<std::size_t>(2 * K + 1), {0.0, 0.0});
  return s;
}

void GLState::enforce_reality() {
  at(0) = {at(0).real(), 0.0};
  for (int k = 1; k <= K; ++k) at(-k) = std::conj(at(k));
}

bool GLState::is_real_field() const noexcept {
  if (at(0).imag() != 0.0) return false;
  for (int k = 1; k <= K; ++k) {
    if (at(-k) != std::conj(at(k))) return false;
  }
  return true;
}

double GLState::norm() const noexcept {
  double acc = 0.0;
  for (const auto& z : u) acc += std::norm(z);
  return std::sqrt(acc);
}

std::vector<std::complex<double>> gl_cubic(const GLState& state) {
  const int K = state.K;
  // v_m = sum_{k1+k2=m} u_k1 u_k2 for |m| <= 2K
  std::vector<std::complex<double>> v(static_cast<std::size_t>(4 * K + 1), {0.0, 0.0});
  for (int k1 = -K; k1 <= K; ++k1) {
    for (int k2 = -K; k2 <= K; ++k2) v[static_cast<std::size_t>(k1 + k2 + 2 * K)] += state.at(k1) * state.at(k2);
  }
  std::vector<std::complex<double>> c(static_cast<std::size_t>(2 * K + 1), {0.0, 0.0});
  for (int k = -K; k <= K; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (int k3 = -K; k3 <= K; ++k3) acc += v[static_cast<std::size_t>(k - k3 + 2 * K)] * state.at(k3);
    c[static_cast<std::size_t>(k + K)] = acc;
  }
  return c;
}

GLState gl_drift(const GLSpec& spec, const GLState& state) {
  const auto c = gl_cubic(state);
  GLState out = GLState::zero(state.K);
  for (int k = -state.K; k <= state.K; ++k) {
    out.at(k) = spec.linear_rate(k) * state.at(k) - c[static_cast<std::size_t>(k + state.K)];
  }
  out.enforce_reality();
  return out;
}

GLState gl_noise_increment(const GLSpec& spec, const NoiseStream& noise, std::uint64_t step) {
  GLState inc = GLState::zero(spec.K);
  std::vector<double> xi(static_cast<std::size_t>(spec.gaussians_per_step()));
  noise.gaussians(step, xi);
  const double sdt = std::sqrt(spec.dt);
  for (int k = 1; k <= spec.K; ++k) {
    const double q = spec.noise_amplitude(k);
    if (q == 0.0) continue;
    const auto i = static_cast<std::size_t>(2 * (k - 1));
    inc.at(k) = {q * sdt * xi[i], q * sdt * xi[i + 1]};
  }
  inc.enforce_reality();
  return inc;
}

GLState gl_step(const GLSpec& spec, const GLState& state, const GLState& increment) {
  if (state.K != spec.K || increment.K != spec.K) throw DimensionError("GL state truncation does not match spec.K");
  const auto c = gl_cubic(state);
  GLState out = GLState::zero(spec.K);
  for (int k = 0; k <= spec.K; ++k) {
    const double den = 1.0 - spec.dt * spec.linear_rate(k);
    out.at(k) = (state.at(k) - spec.dt * c[static_cast<std::size_t>(k + spec.K)] + increment.at(k)) / den;
  }
  out.enforce_reality();
  const double nrm = out.norm();
  if (!std::isfinite(nrm) || nrm > spec.blow_up_threshold) {
    std::ostringstream os;
    os << "GL state norm " << nrm << " exceeded blow-up threshold " << spec.blow_up_threshold;
    std::vector<double> diag;
    for (const auto& z : out.u) {
      diag.push_back(z.real());
      diag.push_back(z.imag());
    }
    throw BlowUpError(os.str(), 1, diag);
  }
  return out;
}

namespace {

GLState checked_step(const GLSpec& spec, const GLState& s, const GLState& inc, long step) {
  try {
    return gl_step(spec, s, inc);
  } catch (const BlowUpError& e) {
    throw BlowUpError(e.what(), step, e.diagnostic_state());
  }
}

double distance(const GLState& a, const GLState& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) acc += std::norm(a.u[i] - b.u[i]);
  return std::sqrt(acc);
}

}  // namespace

std::vector<GLSample> gl_synchronization_test(const GLSpec& spec, GLState a, GLState b, long n_steps,
                                              long record_every, std::uint32_t stream) {
  validate_gl(spec);
  if (a.K != spec.K || b.K != spec.K) throw DimensionError("GL state truncation does not match spec.K");
  a.enforce_reality();
  b.enforce_reality();
  record_every = std::max(1L, record_every);
  const NoiseStream noise(spec.seed, stream);
  std::vector<GLSample> out;
  out.push_back({0.0, distance(a, b), std::norm(a.at(1)), std::norm(b.at(1))});
  for (long k = 0; k < n_steps; ++k) {
    const GLState inc = gl_noise_increment(spec, noise, static_cast<std::uint64_t>(k));
    a = checked_step(spec, a, inc, k + 1);
    b = checked_step(spec, b, inc, k + 1);
    if ((k + 1) % record_every == 0 || k + 1 == n_steps) {
      out.push_back({static_cast<double>(k + 1) * spec.dt, distance(a, b), std::norm(a.at(1)), std::norm(b.at(1))});
    }
  }
  return out;
}

Estimate gl_low_mode_average(const GLSpec& spec, GLState state, long burn_in, long n_steps, std::uint32_t stream,
                             int n_batches) {
  validate_gl(spec);
  if (state.K != spec.K) throw DimensionError("GL state truncation does not match spec.K");
  state.enforce_reality();
  const NoiseStream noise(spec.seed, stream);
  BatchAccumulator acc(n_steps, n_batches);
  for (long k = 0; k < burn_in + n_steps; ++k) {
    if (k >= burn_in) acc.push(std::norm(state.at(1)));
    state = checked_step(spec, state, gl_noise_increment(spec, noise, static_cast<std::uint64_t>(k)), k + 1);
  }
  return acc.series().estimate();
}

GLState gl_random_state(int K, const NoiseStream& source, double u0_lo, double u0_hi, double amplitude) {
  GLState s = GLState::zero(K);
  std::vector<double> u(static_cast<std::size_t>(2 * K + 2));
  source.uniforms(0, u);
  s.at(0) = {u0_lo + (u0_hi - u0_lo) * u[0], 0.0};
  for (int k = 1; k <= K; ++k) {
    const double a = amplitude / k;
    s.at(k) = {a * (2.0 * u[2 * k] - 1.0), a * (2.0 * u[2 * k + 1] - 1.0)};
  }
  s.enforce_reality();
  return s;
}

}  // namespace nesschain
