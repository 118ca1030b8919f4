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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nesschain/errors.hpp"
#include "nesschain/spde_gl.hpp"

using namespace nesschain;
using cd = std::complex<double>;

namespace {

GLState random_real_state(int K, std::uint32_t stream) {
  return gl_random_state(K, NoiseStream(77, stream), -1.0, 1.0, 1.0);
}

GLState deterministic_run(GLSpec spec, GLState u, double t_end) {
  const long n = std::lround(t_end / spec.dt);
  const GLState zero = GLState::zero(u.K);
  for (long i = 0; i < n; ++i) u = gl_step(spec, u, zero);
  return u;
}

double distance(const GLState& a, const GLState& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) s += std::norm(a.u[i] - b.u[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(GLSpecTest, Validation) {
  EXPECT_NO_THROW(validate_gl(GLSpec{}));
  GLSpec s;
  s.K = 3;
  s.dt = 1.5;
  s.L = 0.0;
  try {
    validate_gl(s);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 3u);
  }
}

TEST(GLSpecTest, NoiseAmplitudes) {
  const GLSpec s;
  for (int k = -3; k <= 3; ++k) EXPECT_EQ(s.noise_amplitude(k), 0.0);
  EXPECT_DOUBLE_EQ(s.noise_amplitude(4), std::pow(4.0, -5.0));
  EXPECT_DOUBLE_EQ(s.noise_amplitude(-7), std::pow(7.0, -5.0));
  EXPECT_GT(s.linear_rate(3), 0.0);
  EXPECT_LT(s.linear_rate(11), 0.0);
}

TEST(GLCubic, MatchesBruteForceTripleSum) {
  const int K = 8;
  GLState u = random_real_state(K, 1);
  const auto c = gl_cubic(u);
  for (int k = -K; k <= K; ++k) {
    cd sum = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
      for (int k2 = -K; k2 <= K; ++k2) {
        const int k3 = k - k1 - k2;
        if (std::abs(k3) <= K) sum += u.at(k1) * u.at(k2) * u.at(k3);
      }
    EXPECT_LT(std::abs(c[static_cast<std::size_t>(k + K)] - sum), 1e-12) << k;
  }
}

TEST(GLCubic, ComplexStateWithoutSymmetry) {
  const int K = 4;
  GLState u = GLState::zero(K);
  std::vector<double> r(4 * K + 2);
  NoiseStream(5, 5).gaussians(0, r);
  for (int k = -K; k <= K; ++k) u.at(k) = {r[2 * (k + K)], r[2 * (k + K) + 1]};
  const auto c = gl_cubic(u);
  for (int k = -K; k <= K; ++k) {
    cd sum = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
      for (int k2 = -K; k2 <= K; ++k2) {
        const int k3 = k - k1 - k2;
        if (std::abs(k3) <= K) sum += u.at(k1) * u.at(k2) * u.at(k3);
      }
    EXPECT_LT(std::abs(c[static_cast<std::size_t>(k + K)] - sum), 1e-12) << k;
  }
}

TEST(GLDrift, ZeroModeOnly) {
  const GLSpec s;
  GLState u = GLState::zero(s.K);
  EXPECT_EQ(gl_drift(s, u).norm(), 0.0);
  u.at(0) = 0.7;
  const GLState f = gl_drift(s, u);
  EXPECT_NEAR(f.at(0).real(), 0.7 - 0.343, 1e-15);
  for (int k = 1; k <= s.K; ++k) EXPECT_EQ(std::abs(f.at(k)), 0.0);
}

TEST(GLDrift, PreservesRealFields) {
  const GLSpec s;
  const GLState u = random_real_state(s.K, 2);
  ASSERT_TRUE(u.is_real_field());
  EXPECT_TRUE(gl_drift(s, u).is_real_field());
}

TEST(GLNoise, DegenerateAndConjugateSymmetric) {
  const GLSpec s;
  const NoiseStream n(3, 0);
  const GLState w = gl_noise_increment(s, n, 5);
  EXPECT_TRUE(w.is_real_field());
  for (int k = -s.k_star; k <= s.k_star; ++k) EXPECT_EQ(std::abs(w.at(k)), 0.0);
  for (int k = s.k_star + 1; k <= s.K; ++k) EXPECT_GT(std::abs(w.at(k)), 0.0);
  // Variance of each real component is q_k^2 dt.
  double acc = 0.0;
  const int steps = 4000;
  for (int i = 0; i < steps; ++i) acc += std::norm(gl_noise_increment(s, n, static_cast<std::uint64_t>(i)).at(4));
  const double expect = 2.0 * std::pow(4.0, -10.0) * s.dt;
  EXPECT_NEAR(acc / steps, expect, 0.1 * expect);
}

TEST(GLStep, ZeroNoiseUniformStateRelaxesToOne) {
  GLSpec s;
  GLState u = GLState::zero(s.K);
  u.at(0) = 0.5;
  u = deterministic_run(s, u, 30.0);
  EXPECT_NEAR(u.at(0).real(), 1.0, 1e-10);
  EXPECT_TRUE(u.is_real_field());
  for (int k = 1; k <= s.K; ++k) EXPECT_EQ(std::abs(u.at(k)), 0.0);
}

TEST(GLStep, DeterministicFirstOrderInDt) {
  GLSpec s;
  s.K = 12;
  GLState u0 = gl_random_state(s.K, NoiseStream(9, 0), 0.5, 1.5, 0.3);
  auto at = [&](double dt) {
    GLSpec x = s;
    x.dt = dt;
    return deterministic_run(x, u0, 2.0);
  };
  const GLState a = at(0.02), b = at(0.01), c = at(0.005);
  const double r = distance(a, b) / distance(b, c);
  EXPECT_NEAR(r, 2.0, 0.3);
}

TEST(GLStep, BlowUpDetected) {
  GLSpec s;
  s.blow_up_threshold = 0.5;
  GLState u = GLState::zero(s.K);
  u.at(0) = 0.6;
  EXPECT_THROW(gl_step(s, u, GLState::zero(s.K)), BlowUpError);
}

TEST(GLSync, IdenticalStatesStayIdentical) {
  const GLSpec s;
  const GLState u = random_real_state(s.K, 3);
  const auto v = gl_synchronization_test(s, u, u, 500, 100);
  ASSERT_FALSE(v.empty());
  for (const auto& x : v) EXPECT_EQ(x.distance, 0.0);
}

TEST(GLSync, NearbyStatesContract) {
  const GLSpec s;
  const GLState a = gl_random_state(s.K, NoiseStream(1, 2001), 0.5, 1.5, 0.05);
  const GLState b = gl_random_state(s.K, NoiseStream(1, 2002), 0.5, 1.5, 0.05);
  const auto v = gl_synchronization_test(s, a, b, 2500, 500);
  ASSERT_GE(v.size(), 2u);
  EXPECT_LT(v.back().distance, 1e-8 * v.front().distance);
}

TEST(GLLowMode, DeterministicEstimate) {
  const GLSpec s;
  const GLState u = gl_random_state(s.K, NoiseStream(1, 2001), 0.5, 1.5, 0.05);
  const Estimate a = gl_low_mode_average(s, u, 500, 4000, 3, 8);
  const Estimate b = gl_low_mode_average(s, u, 500, 4000, 3, 8);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_GT(a.mean, 0.0);
}

TEST(GLRandomState, RespectsBounds) {
  const GLState u = gl_random_state(16, NoiseStream(4, 4), 0.5, 1.5, 0.2);
  EXPECT_TRUE(u.is_real_field());
  EXPECT_GE(u.at(0).real(), 0.5);
  EXPECT_LT(u.at(0).real(), 1.5);
  for (int k = 1; k <= 16; ++k) {
    EXPECT_LE(std::abs(u.at(k).real()), 0.2 / k);
    EXPECT_LE(std::abs(u.at(k).imag()), 0.2 / k);
  }
}
