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

// AVX2 variants. This translation unit is compiled with -mavx2 and is only
// entered after a runtime CPU check. FMA is deliberately not used: every
// product and sum rounds separately, as in the scalar reference.

#include <immintrin.h>

#include "nesschain/rng.hpp"
#include "nesschain/simd/kernels.hpp"
#include "nesschain/simd/math.hpp"

namespace nesschain::simd {
namespace {

static_assert(kLanes == 4, "AVX2 kernels process four doubles per register");

using V = __m256d;
using I = __m256i;

inline V load(const double* p) { return _mm256_loadu_pd(p); }
inline void store(double* p, V v) { _mm256_storeu_pd(p, v); }
inline V bc(double x) { return _mm256_set1_pd(x); }
inline V add(V a, V b) { return _mm256_add_pd(a, b); }
inline V sub(V a, V b) { return _mm256_sub_pd(a, b); }
inline V mul(V a, V b) { return _mm256_mul_pd(a, b); }

inline V horner(const std::vector<double>& c, V x) {
  V acc = bc(c.back());
  for (std::size_t i = c.size() - 1; i-- > 0;) acc = add(mul(acc, x), bc(c[i]));
  return acc;
}

void compute_force(const StepParams& sp, Chunk& ch) {
  const int n = sp.n;
  const int d = sp.d;
  double* f = ch.force.data();
  const double* q = ch.q.data();
  const double* s = ch.s.data();
  for (int j = 0; j < n; ++j) {
    V r2 = _mm256_setzero_pd();
    for (int c = 0; c < d; ++c) {
      const V x = load(q + (j * d + c) * kLanes);
      r2 = add(r2, mul(x, x));
    }
    const V g = horner(sp.onsite_force, r2);
    for (int c = 0; c < d; ++c) {
      const int i = (j * d + c) * kLanes;
      store(f + i, mul(g, load(q + i)));
    }
  }
  for (int j = 0; j + 1 < n; ++j) {
    V r2 = _mm256_setzero_pd();
    for (int c = 0; c < d; ++c) {
      const V x = sub(load(q + (j * d + c) * kLanes), load(q + ((j + 1) * d + c) * kLanes));
      r2 = add(r2, mul(x, x));
    }
    const V g = horner(sp.bond_force, r2);
    for (int c = 0; c < d; ++c) {
      const int a = (j * d + c) * kLanes;
      const int b = ((j + 1) * d + c) * kLanes;
      const V fb = mul(g, sub(load(q + a), load(q + b)));
      store(f + a, add(load(f + a), fb));
      store(f + b, sub(load(f + b), fb));
    }
  }
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : n - 1;
    const V k = bc(sp.softening[side]);
    for (int c = 0; c < d; ++c) {
      const int i = (site * d + c) * kLanes;
      store(f + i, sub(load(f + i), mul(k, load(q + i))));
    }
  }
  const V sign = bc(-0.0);
  for (int i = 0; i < n * d * kLanes; i += kLanes) store(f + i, _mm256_xor_pd(load(f + i), sign));
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : n - 1;
    const V gain = bc(sp.force_gain[side]);
    for (int c = 0; c < d; ++c) {
      const int i = (site * d + c) * kLanes;
      store(f + i, add(load(f + i), mul(gain, load(s + (side * d + c) * kLanes))));
    }
  }
}

void accumulate_observables(const StepParams& sp, Chunk& ch) {
  const int n = sp.n;
  const int d = sp.d;
  const double* p = ch.p.data();
  const double* s = ch.s.data();
  const V dt = bc(sp.dt);
  V flux[2];
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : n - 1;
    V dot = _mm256_setzero_pd();
    for (int c = 0; c < d; ++c) dot = add(dot, mul(load(p + (site * d + c) * kLanes), load(s + (side * d + c) * kLanes)));
    flux[side] = mul(bc(sp.force_gain[side]), dot);
  }
  const V sigma = add(mul(flux[0], bc(sp.inv_temperature[0])), mul(flux[1], bc(sp.inv_temperature[1])));
  store(ch.acc_w.data(), add(load(ch.acc_w.data()), mul(dt, sigma)));
  store(ch.acc_ql.data(), add(load(ch.acc_ql.data()), mul(dt, flux[0])));
  store(ch.acc_qr.data(), add(load(ch.acc_qr.data()), mul(dt, flux[1])));
  for (int j = 0; j < n; ++j) {
    V k2 = _mm256_setzero_pd();
    for (int c = 0; c < d; ++c) {
      const V v = load(p + (j * d + c) * kLanes);
      k2 = add(k2, mul(v, v));
    }
    double* a = ch.acc_kin.data() + j * kLanes;
    store(a, add(load(a), mul(dt, k2)));
  }
}

void kick(const StepParams& sp, Chunk& ch) {
  const V h = bc(sp.half_dt);
  for (std::size_t i = 0; i < ch.p.size(); i += kLanes) {
    store(ch.p.data() + i, add(load(ch.p.data() + i), mul(h, load(ch.force.data() + i))));
  }
}

void drift(const StepParams& sp, Chunk& ch) {
  const V h = bc(sp.half_dt);
  for (std::size_t i = 0; i < ch.q.size(); i += kLanes) {
    store(ch.q.data() + i, add(load(ch.q.data() + i), mul(h, load(ch.p.data() + i))));
  }
}

void split_step_avx2(const StepParams& sp, Chunk& ch, const double* noise) {
  accumulate_observables(sp, ch);
  compute_force(sp, ch);
  kick(sp, ch);
  drift(sp, ch);
  const int d = sp.d;
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : sp.n - 1;
    const V decay = bc(sp.ou_decay[side]);
    const V mom = bc(sp.ou_momentum[side]);
    const V amp = bc(sp.ou_noise[side]);
    for (int c = 0; c < d; ++c) {
      const int i = (side * d + c) * kLanes;
      const V a = mul(decay, load(ch.s.data() + i));
      const V b = mul(mom, load(ch.p.data() + (site * d + c) * kLanes));
      const V w = mul(amp, load(noise + i));
      store(ch.s.data() + i, sub(sub(a, b), w));
    }
  }
  drift(sp, ch);
  compute_force(sp, ch);
  kick(sp, ch);
}

void em_step_avx2(const StepParams& sp, Chunk& ch, const double* noise) {
  accumulate_observables(sp, ch);
  compute_force(sp, ch);
  const int d = sp.d;
  const V dt = bc(sp.dt);
  const V sign = bc(-0.0);
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : sp.n - 1;
    const V gam = bc(sp.gamma[side]);
    const V gain = bc(sp.s_gain[side]);
    const V amp = bc(sp.em_noise[side]);
    for (int c = 0; c < d; ++c) {
      const int i = (side * d + c) * kLanes;
      const V sv = load(ch.s.data() + i);
      const V rate = sub(_mm256_xor_pd(mul(gam, sv), sign), mul(gain, load(ch.p.data() + (site * d + c) * kLanes)));
      store(ch.s.data() + i, sub(add(sv, mul(dt, rate)), mul(amp, load(noise + i))));
    }
  }
  for (std::size_t i = 0; i < ch.q.size(); i += kLanes) {
    store(ch.q.data() + i, add(load(ch.q.data() + i), mul(dt, load(ch.p.data() + i))));
  }
  for (std::size_t i = 0; i < ch.p.size(); i += kLanes) {
    store(ch.p.data() + i, add(load(ch.p.data() + i), mul(dt, load(ch.force.data() + i))));
  }
}

// ---- Philox4x32-10, one 32-bit word per 64-bit slot --------------------

inline I low32_mask() { return _mm256_set1_epi64x(0xFFFFFFFFll); }

inline void philox_block(I& w0, I& w1, I& w2, I& w3, std::uint32_t key0, std::uint32_t key1) {
  const I m0 = _mm256_set1_epi64x(philox::kMul0);
  const I m1 = _mm256_set1_epi64x(philox::kMul1);
  for (int r = 0; r < philox::kRounds; ++r) {
    const I k0 = _mm256_set1_epi64x(key0);
    const I k1 = _mm256_set1_epi64x(key1);
    const I p0 = _mm256_mul_epu32(m0, w0);
    const I p1 = _mm256_mul_epu32(m1, w2);
    const I n0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), w1), k0);
    const I n1 = _mm256_and_si256(p1, low32_mask());
    const I n2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), w3), k1);
    const I n3 = _mm256_and_si256(p0, low32_mask());
    w0 = n0;
    w1 = n1;
    w2 = n2;
    w3 = n3;
    key0 += philox::kWeyl0;
    key1 += philox::kWeyl1;
  }
}

// Exact conversion of integers below 2^52 to double.
inline V small_to_double(I x) {
  const I magic = _mm256_set1_epi64x(0x4330000000000000ll);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(x, magic)), bc(4503599627370496.0));
}

// Exact conversion of integers below 2^53 to double.
inline V u53_to_double(I x) {
  const V hi = small_to_double(_mm256_srli_epi64(x, 32));
  const V lo = small_to_double(_mm256_and_si256(x, low32_mask()));
  return add(mul(hi, bc(4294967296.0)), lo);
}

inline V vlog(V x) {
  namespace sm = scalar_math;
  const I bits = _mm256_castpd_si256(x);
  V e = sub(small_to_double(_mm256_srli_epi64(bits, 52)), bc(1023.0));
  V m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
                                            _mm256_set1_epi64x(0x3FF0000000000000ll)));
  const V big = _mm256_cmp_pd(m, bc(sm::kSqrtHalf2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, mul(m, bc(0.5)), big);
  e = _mm256_blendv_pd(e, add(e, bc(1.0)), big);
  const V f = _mm256_div_pd(sub(m, bc(1.0)), add(m, bc(1.0)));
  const V s = mul(f, f);
  V poly = bc(sm::kLogCoeffs[10]);
  for (int k = 9; k >= 0; --k) poly = add(mul(poly, s), bc(sm::kLogCoeffs[k]));
  const V two_f = add(f, f);
  const V log_m = add(two_f, mul(two_f, mul(s, poly)));
  return add(mul(e, bc(sm::kLn2Hi)), add(log_m, mul(e, bc(sm::kLn2Lo))));
}

inline void vsincos_2pi(V u, V& cos_out, V& sin_out) {
  namespace sm = scalar_math;
  const V k = _mm256_round_pd(mul(u, bc(4.0)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const V r = sub(u, mul(k, bc(0.25)));
  const V t = mul(r, bc(sm::kTwoPi));
  const V z = mul(t, t);
  V sp = bc(sm::kSinCoeffs[8]);
  V cp = bc(sm::kCosCoeffs[8]);
  for (int i = 7; i >= 0; --i) {
    sp = add(mul(sp, z), bc(sm::kSinCoeffs[i]));
    cp = add(mul(cp, z), bc(sm::kCosCoeffs[i]));
  }
  const V sn = mul(t, sp);
  const V cs = cp;
  const V neg = bc(-0.0);
  const V nsn = _mm256_xor_pd(sn, neg);
  const V ncs = _mm256_xor_pd(cs, neg);
  const V q1 = _mm256_cmp_pd(k, bc(1.0), _CMP_EQ_OQ);
  const V q2 = _mm256_cmp_pd(k, bc(2.0), _CMP_EQ_OQ);
  const V q3 = _mm256_cmp_pd(k, bc(3.0), _CMP_EQ_OQ);
  V c = cs;
  V s = sn;
  c = _mm256_blendv_pd(c, nsn, q1);
  s = _mm256_blendv_pd(s, cs, q1);
  c = _mm256_blendv_pd(c, ncs, q2);
  s = _mm256_blendv_pd(s, nsn, q2);
  c = _mm256_blendv_pd(c, sn, q3);
  s = _mm256_blendv_pd(s, ncs, q3);
  cos_out = c;
  sin_out = s;
}

void gaussians_avx2(std::uint64_t seed, const std::uint32_t* streams, std::uint64_t step, int count, double* out) {
  const auto key = philox::make_key(seed);
  const I stream_words = _mm256_set_epi64x(streams[3], streams[2], streams[1], streams[0]);
  const V inv53 = bc(scalar_math::kTwoPow53Inv);
  for (int g = 0; g < count; g += 2) {
    I w0 = _mm256_set1_epi64x(static_cast<std::uint32_t>(step));
    I w1 = _mm256_set1_epi64x(static_cast<std::uint32_t>(step >> 32));
    I w2 = stream_words;
    I w3 = _mm256_set1_epi64x(static_cast<std::uint32_t>(g / 2));
    philox_block(w0, w1, w2, w3, key[0], key[1]);
    const I x1 = _mm256_or_si256(_mm256_slli_epi64(w0, 32), w1);
    const I x2 = _mm256_or_si256(_mm256_slli_epi64(w2, 32), w3);
    const V u1 = mul(u53_to_double(_mm256_add_epi64(_mm256_srli_epi64(x1, 11), _mm256_set1_epi64x(1))), inv53);
    const V u2 = mul(u53_to_double(_mm256_srli_epi64(x2, 11)), inv53);
    const V radius = _mm256_sqrt_pd(mul(bc(-2.0), vlog(u1)));
    V c, s;
    vsincos_2pi(u2, c, s);
    store(out + g * kLanes, mul(radius, c));
    if (g + 1 < count) store(out + (g + 1) * kLanes, mul(radius, s));
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", &gaussians_avx2, &split_step_avx2, &em_step_avx2};
  return &table;
}

}  // namespace nesschain::simd
