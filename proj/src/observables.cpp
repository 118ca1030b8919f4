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

#include "nesschain/observables.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nesschain/errors.hpp"

namespace nesschain {

FluxSample flux(const ChainConfig& config, const ChainState& state) {
  const auto d = static_cast<std::size_t>(config.d);
  FluxSample out;
  double phi[2];
  for (int b = 0; b < 2; ++b) {
    const auto& r = reservoir(config, static_cast<Bath>(b));
    const auto site = static_cast<std::size_t>(boundary_site(config, static_cast<Bath>(b))) * d;
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += state.p[site + c] * state.s[b * d + c];
    phi[b] = r.lambda * std::sqrt(r.gamma) * dot;
  }
  out.phi_left = phi[0];
  out.phi_right = phi[1];
  out.sigma = phi[0] / config.left.temperature + phi[1] / config.right.temperature;
  return out;
}

double entropy_production_rate(const ChainConfig& config, const ChainState& state) {
  return flux(config, state).sigma;
}

namespace {

Estimate from_batches(const std::vector<double>& b) {
  Estimate e;
  if (b.empty()) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    e.std_error = e.mean;
    return e;
  }
  const double n = static_cast<double>(b.size());
  e.mean = std::accumulate(b.begin(), b.end(), 0.0) / n;
  if (b.size() < static_cast<std::size_t>(kMinBatches)) {
    e.std_error = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ss = 0.0;
  for (double x : b) ss += (x - e.mean) * (x - e.mean);
  e.std_error = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

}  // namespace

Estimate stationary_average(std::span<const double> series, std::size_t burn_in, int n_batches) {
  if (n_batches < 1) throw std::invalid_argument("stationary_average: n_batches must be >= 1");
  const std::size_t avail = series.size() > burn_in ? series.size() - burn_in : 0;
  if (avail < 2 * static_cast<std::size_t>(n_batches)) {
    throw InsufficientDataError("stationary_average: " + std::to_string(avail) + " samples after burn-in, need " +
                                std::to_string(2 * n_batches));
  }
  const std::size_t bs = avail / static_cast<std::size_t>(n_batches);
  const std::size_t start = series.size() - bs * static_cast<std::size_t>(n_batches);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(n_batches));
  for (int b = 0; b < n_batches; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < bs; ++i) sum += series[start + b * bs + i];
    means.push_back(sum / static_cast<double>(bs));
  }
  return from_batches(means);
}

void BatchSeries::append(const BatchSeries& other) {
  batches_.insert(batches_.end(), other.batches_.begin(), other.batches_.end());
}

Estimate BatchSeries::estimate() const { return from_batches(batches_); }

BatchAccumulator::BatchAccumulator(long samples, int n_batches) {
  if (samples >= 2L * n_batches && n_batches > 0) {
    batch_size_ = samples / n_batches;
    skip_ = samples - batch_size_ * n_batches;
  }
}

void BatchAccumulator::push(double x) {
  if (batch_size_ == 0) return;
  if (seen_++ < skip_) return;
  sum_ += x;
  if (++in_batch_ == batch_size_) {
    series_.add_batch(sum_ / static_cast<double>(batch_size_));
    sum_ = 0.0;
    in_batch_ = 0;
  }
}

void TrajectoryStats::merge(const TrajectoryStats& other) {
  phi_left.append(other.phi_left);
  phi_right.append(other.phi_right);
  phi_total.append(other.phi_total);
  sigma.append(other.sigma);
  if (kinetic.size() < other.kinetic.size()) kinetic.resize(other.kinetic.size());
  for (std::size_t j = 0; j < other.kinetic.size(); ++j) kinetic[j].append(other.kinetic[j]);
  w_final.insert(w_final.end(), other.w_final.begin(), other.w_final.end());
  samples += other.samples;
  burn_in += other.burn_in;
  steps += other.steps;
}

void StatsObserver::begin(const ChainConfig& config, long n_steps, double dt) {
  d_ = config.d;
  dt_ = dt;
  w_ = 0.0;
  const long samples = n_steps > burn_in_ ? n_steps - burn_in_ : 0;
  phi_left_ = BatchAccumulator(samples, n_batches_);
  phi_right_ = BatchAccumulator(samples, n_batches_);
  phi_total_ = BatchAccumulator(samples, n_batches_);
  sigma_ = BatchAccumulator(samples, n_batches_);
  kinetic_.assign(static_cast<std::size_t>(config.n), BatchAccumulator(samples, n_batches_));
  stats_ = TrajectoryStats{};
  stats_.burn_in = std::min(burn_in_, n_steps);
}

void StatsObserver::observe(long step, double, const ChainState& state, const FluxSample& f) {
  w_ += f.sigma * dt_;
  if (step < burn_in_) return;
  ++stats_.samples;
  phi_left_.push(f.phi_left);
  phi_right_.push(f.phi_right);
  phi_total_.push(f.total());
  sigma_.push(f.sigma);
  const auto d = static_cast<std::size_t>(d_);
  for (std::size_t j = 0; j < kinetic_.size(); ++j) {
    double k2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) k2 += state.p[j * d + c] * state.p[j * d + c];
    kinetic_[j].push(k2 / static_cast<double>(d_));
  }
}

void StatsObserver::end(long steps_done, double, const ChainState&) {
  stats_.steps = steps_done;
  stats_.phi_left = phi_left_.series();
  stats_.phi_right = phi_right_.series();
  stats_.phi_total = phi_total_.series();
  stats_.sigma = sigma_.series();
  stats_.kinetic.clear();
  for (const auto& k : kinetic_) stats_.kinetic.push_back(k.series());
  if (steps_done > 0) stats_.w_final.push_back(w_);
}

void WObserver::begin(const ChainConfig&, long, double dt) {
  dt_ = dt;
  w_ = 0.0;
  points_.clear();
}

void WObserver::observe(long step, double time, const ChainState&, const FluxSample& f) {
  if (step % every_ == 0) points_.push_back({step, time, w_});
  w_ += f.sigma * dt_;
}

void WObserver::end(long steps_done, double time, const ChainState&) {
  if (points_.empty() || points_.back().step != steps_done) points_.push_back({steps_done, time, w_});
}

std::vector<Estimate> kinetic_temperature_profile(const TrajectoryStats& stats) {
  std::vector<Estimate> out;
  for (const auto& k : stats.kinetic) {
    if (k.batches().size() < static_cast<std::size_t>(kMinBatches)) {
      throw InsufficientDataError("kinetic_temperature_profile: " + std::to_string(k.batches().size()) +
                                  " batches, need at least " + std::to_string(kMinBatches));
    }
    out.push_back(k.estimate());
  }
  if (out.empty()) throw InsufficientDataError("kinetic_temperature_profile: no samples");
  return out;
}

}  // namespace nesschain
