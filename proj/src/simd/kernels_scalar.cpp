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

#include <cmath>

#include "nesschain/rng.hpp"
#include "nesschain/simd/kernels.hpp"
#include "nesschain/simd/math.hpp"

namespace nesschain::simd {

StepParams StepParams::make(const ChainConfig& config, double dt) {
  StepParams sp;
  sp.n = config.n;
  sp.d = config.d;
  sp.dt = dt;
  sp.half_dt = 0.5 * dt;
  sp.onsite_force = config.onsite.force_polynomial();
  sp.bond_force = config.interaction.force_polynomial();
  for (int b = 0; b < 2; ++b) {
    const auto& r = reservoir(config, static_cast<Bath>(b));
    const double sg = std::sqrt(r.gamma);
    sp.softening[b] = r.lambda * r.lambda;
    sp.force_gain[b] = r.lambda * sg;
    sp.s_gain[b] = r.lambda / sg;
    sp.gamma[b] = r.gamma;
    sp.inv_temperature[b] = 1.0 / r.temperature;
    const double decay = std::exp(-r.gamma * dt);
    sp.ou_decay[b] = decay;
    sp.ou_momentum[b] = -std::expm1(-r.gamma * dt) * sp.s_gain[b] / r.gamma;
    sp.ou_noise[b] = std::sqrt(-r.temperature * std::expm1(-2.0 * r.gamma * dt) / r.gamma);
    sp.em_noise[b] = std::sqrt(2.0 * r.temperature * dt);
  }
  return sp;
}

Chunk::Chunk(int sites, int dim)
    : n(sites),
      d(dim),
      q(static_cast<std::size_t>(sites * dim * kLanes), 0.0),
      p(q.size(), 0.0),
      s(static_cast<std::size_t>(2 * dim * kLanes), 0.0),
      force(q.size(), 0.0),
      acc_w(kLanes, 0.0),
      acc_ql(kLanes, 0.0),
      acc_qr(kLanes, 0.0),
      acc_kin(static_cast<std::size_t>(sites * kLanes), 0.0) {}

void Chunk::reset_accumulators() {
  for (auto* v : {&acc_w, &acc_ql, &acc_qr, &acc_kin}) std::fill(v->begin(), v->end(), 0.0);
}

ChainState Chunk::lane_state(int lane) const {
  ChainState st;
  for (std::size_t i = lane; i < q.size(); i += kLanes) {
    st.q.push_back(q[i]);
    st.p.push_back(p[i]);
  }
  for (std::size_t i = lane; i < s.size(); i += kLanes) st.s.push_back(s[i]);
  return st;
}

void Chunk::set_lane_state(int lane, const ChainState& state) {
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    q[i * kLanes + lane] = state.q[i];
    p[i * kLanes + lane] = state.p[i];
  }
  for (std::size_t i = 0; i < state.s.size(); ++i) s[i * kLanes + lane] = state.s[i];
}

namespace {

inline double horner(const std::vector<double>& c, double x) {
  double acc = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

// force = -grad V_eff(q) + bath force, for every lane.
void compute_force(const StepParams& sp, Chunk& ch) {
  const int n = sp.n;
  const int d = sp.d;
  double* f = ch.force.data();
  const double* q = ch.q.data();
  const double* s = ch.s.data();
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < kLanes; ++l) {
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double x = q[(j * d + c) * kLanes + l];
        r2 = r2 + x * x;
      }
      const double g = horner(sp.onsite_force, r2);
      for (int c = 0; c < d; ++c) {
        const int i = (j * d + c) * kLanes + l;
        f[i] = g * q[i];
      }
    }
  }
  for (int j = 0; j + 1 < n; ++j) {
    for (int l = 0; l < kLanes; ++l) {
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double x = q[(j * d + c) * kLanes + l] - q[((j + 1) * d + c) * kLanes + l];
        r2 = r2 + x * x;
      }
      const double g = horner(sp.bond_force, r2);
      for (int c = 0; c < d; ++c) {
        const int a = (j * d + c) * kLanes + l;
        const int b = ((j + 1) * d + c) * kLanes + l;
        const double fb = g * (q[a] - q[b]);
        f[a] = f[a] + fb;
        f[b] = f[b] - fb;
      }
    }
  }
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : n - 1;
    for (int c = 0; c < d; ++c) {
      for (int l = 0; l < kLanes; ++l) {
        const int i = (site * d + c) * kLanes + l;
        f[i] = f[i] - sp.softening[side] * q[i];
      }
    }
  }
  for (int i = 0; i < n * d * kLanes; ++i) f[i] = -f[i];
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : n - 1;
    for (int c = 0; c < d; ++c) {
      for (int l = 0; l < kLanes; ++l) {
        const int i = (site * d + c) * kLanes + l;
        f[i] = f[i] + sp.force_gain[side] * s[(side * d + c) * kLanes + l];
      }
    }
  }
}

void accumulate_observables(const StepParams& sp, Chunk& ch) {
  const int n = sp.n;
  const int d = sp.d;
  const double* p = ch.p.data();
  const double* s = ch.s.data();
  for (int l = 0; l < kLanes; ++l) {
    double flux[2];
    for (int side = 0; side < 2; ++side) {
      const int site = side == 0 ? 0 : n - 1;
      double dot = 0.0;
      for (int c = 0; c < d; ++c) dot = dot + p[(site * d + c) * kLanes + l] * s[(side * d + c) * kLanes + l];
      flux[side] = sp.force_gain[side] * dot;
    }
    const double sigma = flux[0] * sp.inv_temperature[0] + flux[1] * sp.inv_temperature[1];
    ch.acc_w[l] = ch.acc_w[l] + sp.dt * sigma;
    ch.acc_ql[l] = ch.acc_ql[l] + sp.dt * flux[0];
    ch.acc_qr[l] = ch.acc_qr[l] + sp.dt * flux[1];
  }
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < kLanes; ++l) {
      double k2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double v = p[(j * d + c) * kLanes + l];
        k2 = k2 + v * v;
      }
      ch.acc_kin[j * kLanes + l] = ch.acc_kin[j * kLanes + l] + sp.dt * k2;
    }
  }
}

void kick(const StepParams& sp, Chunk& ch) {
  for (std::size_t i = 0; i < ch.p.size(); ++i) ch.p[i] = ch.p[i] + sp.half_dt * ch.force[i];
}

void drift(const StepParams& sp, Chunk& ch) {
  for (std::size_t i = 0; i < ch.q.size(); ++i) ch.q[i] = ch.q[i] + sp.half_dt * ch.p[i];
}

void split_step_scalar(const StepParams& sp, Chunk& ch, const double* noise) {
  accumulate_observables(sp, ch);
  compute_force(sp, ch);
  kick(sp, ch);
  drift(sp, ch);
  const int d = sp.d;
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : sp.n - 1;
    for (int c = 0; c < d; ++c) {
      for (int l = 0; l < kLanes; ++l) {
        const int i = (side * d + c) * kLanes + l;
        const double a = sp.ou_decay[side] * ch.s[i];
        const double b = sp.ou_momentum[side] * ch.p[(site * d + c) * kLanes + l];
        const double w = sp.ou_noise[side] * noise[i];
        ch.s[i] = (a - b) - w;
      }
    }
  }
  drift(sp, ch);
  compute_force(sp, ch);
  kick(sp, ch);
}

void em_step_scalar(const StepParams& sp, Chunk& ch, const double* noise) {
  accumulate_observables(sp, ch);
  compute_force(sp, ch);
  const int d = sp.d;
  for (int side = 0; side < 2; ++side) {
    const int site = side == 0 ? 0 : sp.n - 1;
    for (int c = 0; c < d; ++c) {
      for (int l = 0; l < kLanes; ++l) {
        const int i = (side * d + c) * kLanes + l;
        const double rate = -(sp.gamma[side] * ch.s[i]) - sp.s_gain[side] * ch.p[(site * d + c) * kLanes + l];
        ch.s[i] = (ch.s[i] + sp.dt * rate) - sp.em_noise[side] * noise[i];
      }
    }
  }
  for (std::size_t i = 0; i < ch.q.size(); ++i) ch.q[i] = ch.q[i] + sp.dt * ch.p[i];
  for (std::size_t i = 0; i < ch.p.size(); ++i) ch.p[i] = ch.p[i] + sp.dt * ch.force[i];
}

void gaussians_scalar(std::uint64_t seed, const std::uint32_t* streams, std::uint64_t step, int count,
                      double* out) {
  const auto key = philox::make_key(seed);
  for (int g = 0; g < count; g += 2) {
    for (int l = 0; l < kLanes; ++l) {
      const auto blk = philox::generate(philox::make_counter(step, streams[l], static_cast<std::uint32_t>(g / 2)), key);
      const auto [z0, z1] = scalar_math::box_muller(blk[0], blk[1], blk[2], blk[3]);
      out[g * kLanes + l] = z0;
      if (g + 1 < count) out[(g + 1) * kLanes + l] = z1;
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &gaussians_scalar, &split_step_scalar, &em_step_scalar};
  return table;
}

}  // namespace nesschain::simd
