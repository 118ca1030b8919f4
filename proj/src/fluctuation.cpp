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

#include "nesschain/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nesschain/errors.hpp"
#include "nesschain/rng.hpp"

namespace nesschain {

std::vector<double> default_eta_grid() {
  std::vector<double> g(11);
  for (int i = 0; i <= 10; ++i) g[static_cast<std::size_t>(i)] = i / 10.0;
  return g;
}

namespace {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

CGFEstimate empirical_cgf(std::span<const double> samples, double horizon, std::span<const double> eta_grid,
                          const CGFOptions& options) {
  if (samples.empty()) throw std::invalid_argument("empirical_cgf: no samples");
  if (samples.size() < options.min_samples) {
    throw std::invalid_argument("empirical_cgf: " + std::to_string(samples.size()) + " samples, need at least " +
                                std::to_string(options.min_samples));
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("empirical_cgf: horizon must be > 0");
  for (double x : samples) {
    if (!std::isfinite(x)) throw std::invalid_argument("empirical_cgf: non-finite sample");
  }
  for (double eta : eta_grid) {
    if (!std::isfinite(eta)) throw std::invalid_argument("empirical_cgf: non-finite eta");
    if (!options.allow_extrapolation && (eta < 0.0 || eta > 1.0)) {
      throw std::invalid_argument("empirical_cgf: eta outside [0, 1] (enable extrapolation explicitly)");
    }
  }

  const std::size_t n = samples.size();
  const std::size_t g = eta_grid.size();
  CGFEstimate out;
  out.eta_grid.assign(eta_grid.begin(), eta_grid.end());
  out.horizon = horizon;
  out.samples = n;
  out.mean_rate = mean_of(samples) / horizon;
  out.e_values.assign(g, 0.0);
  out.ess_fraction.assign(g, 1.0);

  // weights[j][i] = exp(-eta_j x_i - shift_j), shift_j = max_i(-eta_j x_i)
  std::vector<std::vector<double>> weights(g, std::vector<double>(n));
  std::vector<double> shift(g, 0.0);
  for (std::size_t j = 0; j < g; ++j) {
    const double eta = eta_grid[j];
    if (eta == 0.0) continue;
    double m = -std::numeric_limits<double>::infinity();
    for (double x : samples) m = std::max(m, -eta * x);
    shift[j] = m;
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(-eta * samples[i] - m);
      weights[j][i] = w;
      sum += w;
      sum2 += w * w;
    }
    out.e_values[j] = -(std::log(sum / static_cast<double>(n)) + m) / horizon;
    out.ess_fraction[j] = sum * sum / sum2 / static_cast<double>(n);
    if (out.ess_fraction[j] < options.dominance_fraction) {
      std::ostringstream os;
      os << "eta = " << eta << ": exponential average dominated by " << out.ess_fraction[j] * 100.0
         << "% of the samples";
      out.warnings.push_back(os.str());
    }
  }

  const int nb = std::max(0, options.bootstrap);
  out.replicates.assign(static_cast<std::size_t>(nb), std::vector<double>(g, 0.0));
  std::vector<double> u(n);
  std::vector<std::size_t> idx(n);
  const NoiseStream resampler(options.seed, 0xB007u);
  for (int b = 0; b < nb; ++b) {
    resampler.uniforms(static_cast<std::uint64_t>(b), u);
    for (std::size_t i = 0; i < n; ++i) idx[i] = std::min(n - 1, static_cast<std::size_t>(u[i] * static_cast<double>(n)));
    for (std::size_t j = 0; j < g; ++j) {
      if (eta_grid[j] == 0.0) continue;
      double sum = 0.0;
      for (std::size_t i : idx) sum += weights[j][i];
      double value;
      if (sum > 0.0) {
        value = -(std::log(sum / static_cast<double>(n)) + shift[j]) / horizon;
      } else {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i : idx) m = std::max(m, -eta_grid[j] * samples[i]);
        double s = 0.0;
        for (std::size_t i : idx) s += std::exp(-eta_grid[j] * samples[i] - m);
        value = -(std::log(s / static_cast<double>(n)) + m) / horizon;
      }
      out.replicates[static_cast<std::size_t>(b)][j] = value;
    }
  }
  out.ci_lo = out.e_values;
  out.ci_hi = out.e_values;
  if (nb >= 2) {
    std::vector<double> col(static_cast<std::size_t>(nb));
    for (std::size_t j = 0; j < g; ++j) {
      for (int b = 0; b < nb; ++b) col[static_cast<std::size_t>(b)] = out.replicates[static_cast<std::size_t>(b)][j];
      out.ci_lo[j] = percentile(col, 0.025);
      out.ci_hi[j] = percentile(col, 0.975);
    }
  }
  return out;
}

RateFunctionEstimate legendre_transform(const CGFEstimate& cgf, std::vector<double> y_grid) {
  RateFunctionEstimate out;
  out.mean_sigma = cgf.mean_rate;
  std::vector<double> eta;
  std::vector<double> e;
  for (std::size_t j = 0; j < cgf.eta_grid.size(); ++j) {
    if (std::isfinite(cgf.e_values[j])) {
      eta.push_back(cgf.eta_grid[j]);
      e.push_back(cgf.e_values[j]);
    } else {
      out.warnings.push_back("dropped non-finite CGF value at eta = " + std::to_string(cgf.eta_grid[j]));
    }
  }
  if (eta.size() < 9) throw std::invalid_argument("legendre_transform: need at least 9 finite CGF values");
  std::sort(y_grid.begin(), y_grid.end());
  out.y_grid = y_grid;
  out.e_hat.reserve(y_grid.size());
  for (double y : y_grid) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < eta.size(); ++j) best = std::max(best, e[j] - eta[j] * y * out.mean_sigma);
    out.e_hat.push_back(best);
  }
  return out;
}

RatioTest histogram_ratio_test(std::span<const double> samples, double horizon, double bin_width, long min_count,
                               int min_bins) {
  RatioTest out;
  if (samples.size() < 2 || !(horizon > 0.0)) {
    out.message = "ratio test unavailable: too few samples";
    return out;
  }
  std::vector<double> u(samples.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = samples[i] / horizon;
  if (!(bin_width > 0.0)) bin_width = sd_of(u) / 4.0;
  if (!(bin_width > 0.0)) {
    out.message = "ratio test unavailable: degenerate sample";
    return out;
  }
  // Bin k >= 0 covers |u| in [k h, (k+1) h) on each side.
  std::vector<long> pos;
  std::vector<long> neg;
  for (double x : u) {
    const auto k = static_cast<std::size_t>(std::floor(std::abs(x) / bin_width));
    auto& side = x >= 0.0 ? pos : neg;
    if (k > 100000) continue;
    if (side.size() <= k) side.resize(k + 1, 0);
    ++side[k];
  }
  double swuu = 0.0;
  double swul = 0.0;
  for (std::size_t k = 0; k < std::min(pos.size(), neg.size()); ++k) {
    if (pos[k] < min_count || neg[k] < min_count) continue;
    RatioTest::Bin bin{};
    bin.u = (static_cast<double>(k) + 0.5) * bin_width;
    bin.count_pos = pos[k];
    bin.count_neg = neg[k];
    bin.log_ratio = std::log(static_cast<double>(pos[k]) / static_cast<double>(neg[k])) / horizon;
    bin.std_error = std::sqrt(1.0 / static_cast<double>(pos[k]) + 1.0 / static_cast<double>(neg[k])) / horizon;
    const double w = 1.0 / (bin.std_error * bin.std_error);
    swuu += w * bin.u * bin.u;
    swul += w * bin.u * bin.log_ratio;
    out.bins.push_back(bin);
  }
  if (static_cast<int>(out.bins.size()) < min_bins) {
    out.message = "ratio test unavailable at this horizon: too few negative fluctuations";
    return out;
  }
  out.available = true;
  out.slope = swul / swuu;
  out.slope_se = 1.0 / std::sqrt(swuu);
  return out;
}

std::vector<SymmetryPair> symmetry_pairs(const CGFEstimate& cgf) {
  std::vector<SymmetryPair> out;
  const auto& grid = cgf.eta_grid;
  auto find = [&grid](double x) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (std::abs(grid[j] - x) < 1e-9) return j;
    }
    return std::nullopt;
  };
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double eta = grid[j];
    if (!(eta > 0.0) || eta > 0.5 + 1e-12) continue;
    const auto k = find(1.0 - eta);
    if (!k) continue;
    SymmetryPair pr{};
    pr.eta = eta;
    pr.e_eta = cgf.e_values[j];
    pr.e_mirror = cgf.e_values[*k];
    pr.difference = pr.e_eta - pr.e_mirror;
    const double h1 = 0.5 * (cgf.ci_hi[j] - cgf.ci_lo[j]);
    const double h2 = 0.5 * (cgf.ci_hi[*k] - cgf.ci_lo[*k]);
    pr.combined_ci = std::sqrt(h1 * h1 + h2 * h2);
    if (cgf.replicates.size() >= 2) {
      std::vector<double> diff;
      diff.reserve(cgf.replicates.size());
      for (const auto& r : cgf.replicates) diff.push_back(r[j] - r[*k]);
      pr.paired_ci_lo = percentile(diff, 0.025);
      pr.paired_ci_hi = percentile(diff, 0.975);
    }
    pr.consistent = std::abs(pr.difference) <= pr.combined_ci;
    out.push_back(pr);
  }
  return out;
}

FunctionalAnalysis analyse_functional(std::string name, std::vector<double> x_t, std::vector<double> x_2t,
                                      double horizon, std::span<const double> eta_grid, const CGFOptions& options) {
  FunctionalAnalysis fa;
  fa.name = std::move(name);
  fa.cgf_t = empirical_cgf(x_t, horizon, eta_grid, options);
  fa.cgf_2t = empirical_cgf(x_2t, 2.0 * horizon, eta_grid, options);
  const std::size_t g = eta_grid.size();
  // Both estimates resample the same trajectory indices, so replicates pair up.
  CGFEstimate ex = fa.cgf_t;
  for (std::size_t j = 0; j < g; ++j) {
    ex.e_values[j] = 2.0 * fa.cgf_2t.e_values[j] - fa.cgf_t.e_values[j];
    const double half = 0.5 * (fa.cgf_t.ci_hi[j] - fa.cgf_t.ci_lo[j]);
    fa.unconverged.push_back(std::abs(fa.cgf_2t.e_values[j] - fa.cgf_t.e_values[j]) > half);
  }
  std::vector<double> col(ex.replicates.size());
  for (std::size_t b = 0; b < ex.replicates.size(); ++b) {
    for (std::size_t j = 0; j < g; ++j) ex.replicates[b][j] = 2.0 * fa.cgf_2t.replicates[b][j] - fa.cgf_t.replicates[b][j];
  }
  for (std::size_t j = 0; j < g && col.size() >= 2; ++j) {
    for (std::size_t b = 0; b < col.size(); ++b) col[b] = ex.replicates[b][j];
    ex.ci_lo[j] = percentile(col, 0.025);
    ex.ci_hi[j] = percentile(col, 0.975);
  }
  fa.e_extrapolated = ex.e_values;
  fa.extrapolated_ci_lo = ex.ci_lo;
  fa.extrapolated_ci_hi = ex.ci_hi;
  fa.pairs_t = symmetry_pairs(fa.cgf_t);
  fa.pairs_extrapolated = symmetry_pairs(ex);
  fa.ratio_t = histogram_ratio_test(x_t, horizon);
  fa.ratio_2t = histogram_ratio_test(x_2t, 2.0 * horizon);
  fa.mean_rate = mean_of(x_2t) / (2.0 * horizon);
  fa.mean_rate_se = sd_of(x_2t) / std::sqrt(static_cast<double>(x_2t.size())) / (2.0 * horizon);
  fa.x_t = std::move(x_t);
  fa.x_2t = std::move(x_2t);
  return fa;
}

namespace {

EnsembleResult run_w_ensemble(const ChainConfig& config, const GCTestSpec& spec, std::uint32_t first_stream) {
  const double dt = spec.integrator.dt;
  const long t_steps = std::lround(spec.horizon / dt);
  if (t_steps < 1) throw ConfigError("gc test horizon shorter than one step");
  EnsembleSpec es;
  es.trajectories = spec.trajectories;
  es.seed = spec.seed;
  es.first_stream = first_stream;
  es.burn_in_steps = std::lround(spec.burn_in / dt);
  es.steps = 2 * t_steps;
  es.checkpoints = {t_steps, 2 * t_steps};
  es.integrator = spec.integrator;
  es.threads = spec.threads;
  return run_ensemble(config, es);
}

}  // namespace

GCReport gc_symmetry_test(const ChainConfig& config, const GCTestSpec& spec) {
  validate_config(config);
  validate_integrator(spec.integrator);
  if (spec.trajectories < 2) throw ConfigError("gc test needs at least 2 trajectories");
  if (!(spec.horizon > 0.0) || spec.burn_in < 0.0) throw ConfigError("gc test needs horizon > 0 and burn_in >= 0");
  const double t = spec.horizon;
  const double bl = 1.0 / config.left.temperature;
  const double br = 1.0 / config.right.temperature;
  GCReport rep;

  const EnsembleResult res = run_w_ensemble(config, spec, 0);
  const std::size_t n = static_cast<std::size_t>(spec.trajectories);
  std::vector<double> raw[2];
  std::vector<double> cor[2];
  for (int h = 0; h < 2; ++h) {
    raw[h].resize(n);
    cor[h].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      raw[h][i] = -res.w_at[h][i];
      cor[h][i] = -0.5 * (bl - br) * (res.ql_at[h][i] - res.qr_at[h][i]);
    }
  }
  rep.corrected = analyse_functional("boundary-corrected", std::move(cor[0]), std::move(cor[1]), t, spec.eta_grid,
                                     spec.cgf);
  rep.raw = analyse_functional("raw", std::move(raw[0]), std::move(raw[1]), t, spec.eta_grid, spec.cgf);

  if (spec.control) {
    ChainConfig eq = config;
    const double tm = 0.5 * (config.left.temperature + config.right.temperature);
    eq.left.temperature = tm;
    eq.right.temperature = tm;
    const EnsembleResult c = run_w_ensemble(eq, spec, static_cast<std::uint32_t>(spec.trajectories));
    rep.has_control = true;
    rep.control_x_t.resize(n);
    for (std::size_t i = 0; i < n; ++i) rep.control_x_t[i] = -c.w_at[0][i];
    rep.control_ratio = histogram_ratio_test(rep.control_x_t, t);
    rep.control_mean_rate = mean_of(rep.control_x_t) / t;
    rep.control_mean_rate_se = sd_of(rep.control_x_t) / std::sqrt(static_cast<double>(n)) / t;
  }
  return rep;
}

}  // namespace nesschain
