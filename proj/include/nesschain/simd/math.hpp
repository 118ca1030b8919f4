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

// Scalar elementary functions used by the Gaussian sampler. The AVX2 kernels
// evaluate exactly the same operation sequence, so both paths round
// identically and produce bit-equal noise.

#include <bit>
#include <cmath>
#include <cstdint>
#include <utility>

namespace nesschain::simd::scalar_math {

inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kSqrtHalf2 = 1.41421356237309504880;  // sqrt(2)
inline constexpr double kTwoPi = 6.28318530717958647692;
inline constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

// atanh series 2 f (1 + s/3 + s^2/5 + ...), s = f^2, truncated after s^11.
inline constexpr double kLogCoeffs[11] = {
    1.0 / 3.0,  1.0 / 5.0,  1.0 / 7.0,  1.0 / 9.0,  1.0 / 11.0, 1.0 / 13.0,
    1.0 / 15.0, 1.0 / 17.0, 1.0 / 19.0, 1.0 / 21.0, 1.0 / 23.0,
};

/// Natural logarithm for normal positive x.
inline double log(double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  double e = static_cast<double>(static_cast<std::int64_t>(bits >> 52) - 1023);
  double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) | 0x3FF0000000000000ull);
  if (m > kSqrtHalf2) {
    m = m * 0.5;
    e = e + 1.0;
  }
  const double f = (m - 1.0) / (m + 1.0);
  const double s = f * f;
  double poly = kLogCoeffs[10];
  for (int k = 9; k >= 0; --k) poly = poly * s + kLogCoeffs[k];
  const double two_f = f + f;
  const double log_m = two_f + two_f * (s * poly);
  return e * kLn2Hi + (log_m + e * kLn2Lo);
}

// Taylor coefficients in z = t^2 for sin(t)/t and cos(t), |t| <= pi/4.
inline constexpr double kSinCoeffs[9] = {
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
};
inline constexpr double kCosCoeffs[9] = {
    1.0,
    -1.0 / 2.0,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
    1.0 / 20922789888000.0,
};

/// (cos 2 pi u, sin 2 pi u) for u in [0, 1).
inline std::pair<double, double> sincos_2pi(double u) {
  const double k = std::nearbyint(u * 4.0);
  const double r = u - k * 0.25;  // exact, |r| <= 1/8
  const double t = r * kTwoPi;
  const double z = t * t;
  double sp = kSinCoeffs[8];
  double cp = kCosCoeffs[8];
  for (int i = 7; i >= 0; --i) {
    sp = sp * z + kSinCoeffs[i];
    cp = cp * z + kCosCoeffs[i];
  }
  const double sn = t * sp;
  const double cs = cp;
  switch (static_cast<int>(k)) {
    case 1:
      return {-sn, cs};
    case 2:
      return {-cs, -sn};
    case 3:
      return {sn, -cs};
    default:  // 0 or 4
      return {cs, sn};
  }
}

/// 53-bit uniform in (0, 1] from two 32-bit words.
inline double uniform_open_closed(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>((x >> 11) + 1) * kTwoPow53Inv;
}

/// 53-bit uniform in [0, 1) from two 32-bit words.
inline double uniform_closed_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(x >> 11) * kTwoPow53Inv;
}

/// Box-Muller pair from one 128-bit random block.
inline std::pair<double, double> box_muller(std::uint32_t w0, std::uint32_t w1, std::uint32_t w2,
                                            std::uint32_t w3) {
  const double u1 = uniform_open_closed(w0, w1);
  const double u2 = uniform_closed_open(w2, w3);
  const double radius = std::sqrt(-2.0 * log(u1));
  const auto [c, s] = sincos_2pi(u2);
  return {radius * c, radius * s};
}

}  // namespace nesschain::simd::scalar_math
