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

#include <span>
#include <vector>

#include "nesschain/model.hpp"

namespace nesschain {

/// Boundary energy fluxes (from each bath into the chain) and the entropy
/// production rate sigma = phi_left / T_L + phi_right / T_R.
struct FluxSample {
  double phi_left = 0.0;
  double phi_right = 0.0;
  double sigma = 0.0;

  double total() const noexcept { return phi_left + phi_right; }
};

/// phi_b = lambda_b sqrt(gamma_b) p_{site(b)} . s_b
FluxSample flux(const ChainConfig& config, const ChainState& state);
double entropy_production_rate(const ChainConfig& config, const ChainState& state);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;  // NaN when fewer than kMinBatches batches exist
};

inline constexpr int kMinBatches = 8;
inline constexpr int kDefaultBatches = 32;

/// Batch-means estimate over series[burn_in:]. The leading remainder that does
/// not fill a whole batch is skipped. Throws InsufficientDataError when fewer
/// than 2 * n_batches samples remain.
Estimate stationary_average(std::span<const double> series, std::size_t burn_in, int n_batches = kDefaultBatches);

/// Batch means collected from one or more trajectories.
class BatchSeries {
 public:
  void add_batch(double mean) { batches_.push_back(mean); }
  void append(const BatchSeries& other);
  const std::vector<double>& batches() const noexcept { return batches_; }
  /// Mean of batch means and its standard error (NaN below kMinBatches).
  Estimate estimate() const;

 private:
  std::vector<double> batches_;
};

/// Streaming batch-means accumulator for a run of known length.
class BatchAccumulator {
 public:
  BatchAccumulator() = default;
  BatchAccumulator(long samples, int n_batches);
  void push(double x);
  const BatchSeries& series() const noexcept { return series_; }

 private:
  long skip_ = 0;
  long batch_size_ = 0;
  long seen_ = 0;
  long in_batch_ = 0;
  double sum_ = 0.0;
  BatchSeries series_;
};

/// Stationary statistics of one or more trajectories.
struct TrajectoryStats {
  BatchSeries phi_left;
  BatchSeries phi_right;
  BatchSeries phi_total;
  BatchSeries sigma;
  std::vector<BatchSeries> kinetic;  // |p_j|^2 / d per site
  std::vector<double> w_final;       // integral of sigma over each whole run
  long samples = 0;                  // post burn-in samples
  long burn_in = 0;
  long steps = 0;

  bool empty() const noexcept { return samples == 0; }
  /// Pools the batches of another run. Associative; the pooled estimate is
  /// independent of merge order up to rounding.
  void merge(const TrajectoryStats& other);
};

class Observer {
 public:
  virtual ~Observer() = default;
  virtual void begin(const ChainConfig& /*config*/, long /*n_steps*/, double /*dt*/) {}
  /// Called for the state at the left end of every step, k = 0 .. n_steps-1.
  virtual void observe(long step, double time, const ChainState& state, const FluxSample& fluxes) = 0;
  virtual void end(long /*steps_done*/, double /*time*/, const ChainState& /*final_state*/) {}
};

/// Builds TrajectoryStats from the post burn-in samples.
class StatsObserver : public Observer {
 public:
  StatsObserver(long burn_in, int n_batches = kDefaultBatches) : burn_in_(burn_in), n_batches_(n_batches) {}
  void begin(const ChainConfig& config, long n_steps, double dt) override;
  void observe(long step, double time, const ChainState& state, const FluxSample& fluxes) override;
  void end(long steps_done, double time, const ChainState& final_state) override;
  const TrajectoryStats& stats() const noexcept { return stats_; }

 private:
  long burn_in_;
  int n_batches_;
  int d_ = 1;
  double dt_ = 0.0;
  double w_ = 0.0;
  BatchAccumulator phi_left_, phi_right_, phi_total_, sigma_;
  std::vector<BatchAccumulator> kinetic_;
  std::vector<double> scratch_;
  TrajectoryStats stats_;
};

/// W(t) = integral of sigma over [0, t], left-endpoint quadrature over steps,
/// recorded every `every` steps and at the end of the run.
class WObserver : public Observer {
 public:
  struct Point {
    long step;
    double time;
    double w;
  };
  explicit WObserver(long every) : every_(every > 0 ? every : 1) {}
  void begin(const ChainConfig& config, long n_steps, double dt) override;
  void observe(long step, double time, const ChainState& state, const FluxSample& fluxes) override;
  void end(long steps_done, double time, const ChainState& final_state) override;
  const std::vector<Point>& points() const noexcept { return points_; }
  double current() const noexcept { return w_; }

 private:
  long every_;
  double dt_ = 0.0;
  double w_ = 0.0;
  std::vector<Point> points_;
};

/// Per-site kinetic temperatures <|p_j|^2>/d with batch-means errors. Throws
/// InsufficientDataError when fewer than kMinBatches batches were collected.
std::vector<Estimate> kinetic_temperature_profile(const TrajectoryStats& stats);

}  // namespace nesschain
