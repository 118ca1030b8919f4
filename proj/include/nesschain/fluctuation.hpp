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

#include "nesschain/dynamics.hpp"
#include "nesschain/model.hpp"

namespace nesschain {

/// Empirical scaled cumulant generating function
///   e(eta) = -(1/t) log < exp(-eta X) >
/// of samples X taken at horizon t.
struct CGFEstimate {
  std::vector<double> eta_grid;
  std::vector<double> e_values;
  std::vector<double> ci_lo;  // 95% percentile bootstrap interval
  std::vector<double> ci_hi;
  std::vector<double> ess_fraction;           // effective sample size / N per eta
  std::vector<std::vector<double>> replicates;  // [resample][eta]
  double horizon = 0.0;
  double mean_rate = 0.0;  // sample mean of X / t
  std::size_t samples = 0;
  std::vector<std::string> warnings;
};

struct CGFOptions {
  int bootstrap = 1000;
  std::uint64_t seed = 0x5eed;
  std::size_t min_samples = 1000;
  bool allow_extrapolation = false;  // permit eta outside [0, 1]
  double dominance_fraction = 0.01;  // warn when ESS falls below this share of N
};

/// 0, 0.1, ..., 1 (11 points, symmetric about 1/2).
std::vector<double> default_eta_grid();

/// Throws std::invalid_argument on empty or too few samples, non-finite
/// samples, horizon <= 0 or eta outside [0, 1] (unless allowed).
CGFEstimate empirical_cgf(std::span<const double> samples, double horizon, std::span<const double> eta_grid,
                          const CGFOptions& options = {});

/// Rate function on the scale y = X / (t m) with m the mean rate:
///   e_hat(y) = sup_eta [ e(eta) - eta y m ]  over the CGF grid.
struct RateFunctionEstimate {
  std::vector<double> y_grid;
  std::vector<double> e_hat;
  double mean_sigma = 0.0;
  std::vector<std::string> warnings;
};

/// Needs at least 9 finite CGF values; non-finite ones are dropped with a
/// warning. The y grid is sorted before use.
RateFunctionEstimate legendre_transform(const CGFEstimate& cgf, std::vector<double> y_grid);

/// Weighted slope through the origin of (1/t) log[P(X/t = u) / P(X/t = -u)]
/// against u, from a histogram symmetric about 0.
struct RatioTest {
  bool available = false;
  std::string message;
  double slope = 0.0;
  double slope_se = 0.0;
  struct Bin {
    double u;
    double log_ratio;
    double std_error;
    long count_pos;
    long count_neg;
  };
  std::vector<Bin> bins;
};

/// Bins of width bin_width (default: sample sd of X/t divided by 4) on each
/// side of 0; a bin pair is used when both sides hold at least min_count.
RatioTest histogram_ratio_test(std::span<const double> samples, double horizon, double bin_width = 0.0,
                               long min_count = 10, int min_bins = 3);

struct GCTestSpec {
  int trajectories = 4000;
  double horizon = 400.0;  // t; the ensemble also records 2t
  double burn_in = 200.0;  // time before W starts accumulating
  IntegratorSpec integrator;
  std::uint64_t seed = 1;
  int threads = 0;
  std::vector<double> eta_grid = default_eta_grid();
  CGFOptions cgf;
  bool control = true;  // run the equal-temperature control
};

struct SymmetryPair {
  double eta;
  double e_eta;
  double e_mirror;        // e(1 - eta)
  double difference;      // e(eta) - e(1 - eta)
  double combined_ci;     // half-widths of both intervals added in quadrature
  double paired_ci_lo;    // bootstrap interval of the difference
  double paired_ci_hi;
  bool consistent;        // |difference| <= combined_ci
};

/// Estimates for one functional X at horizons t and 2t (same trajectories).
struct FunctionalAnalysis {
  std::string name;
  std::vector<double> x_t;
  std::vector<double> x_2t;
  CGFEstimate cgf_t;
  CGFEstimate cgf_2t;
  // 2 e_2t - e_t removes a boundary contribution decaying like 1/t.
  std::vector<double> e_extrapolated;
  std::vector<double> extrapolated_ci_lo;
  std::vector<double> extrapolated_ci_hi;
  std::vector<bool> unconverged;  // |e_2t - e_t| beyond the interval at t
  std::vector<SymmetryPair> pairs_t;
  std::vector<SymmetryPair> pairs_extrapolated;
  RatioTest ratio_t;
  RatioTest ratio_2t;
  double mean_rate = 0.0;  // X(2t) / 2t
  double mean_rate_se = 0.0;
};

/// X and t given; everything else derived.
FunctionalAnalysis analyse_functional(std::string name, std::vector<double> x_t, std::vector<double> x_2t,
                                      double horizon, std::span<const double> eta_grid, const CGFOptions& options);

/// Gallavotti-Cohen test report.
///
/// With sigma = phi_L/T_L + phi_R/T_R and heat flowing from hot to cold, the
/// mean of W is negative; the symmetric functional is the entropy released
/// into the baths, X = -W. Because dH_eff = (phi_L + phi_R) dt pathwise,
/// W = beta_bar dH_eff + (beta_L - beta_R)(Q_L - Q_R)/2 with
/// beta_bar = (1/T_L + 1/T_R)/2 and Q_b the heat from bath b. The first part
/// is a pure boundary term with O(1) variance, which dominates at desk-scale
/// horizons; `corrected` analyses X = -(W - beta_bar dH_eff), which has the
/// same t -> infinity limit. `raw` analyses X = -W itself.
struct GCReport {
  FunctionalAnalysis corrected;
  FunctionalAnalysis raw;
  double predicted_slope = 1.0;
  // Equal-temperature control (both baths at the mean temperature), on -W.
  bool has_control = false;
  RatioTest control_ratio;
  double control_mean_rate = 0.0;
  double control_mean_rate_se = 0.0;
  std::vector<double> control_x_t;
};

GCReport gc_symmetry_test(const ChainConfig& config, const GCTestSpec& spec);

/// Symmetry pairs for eta in (0, 1/2] from one CGF estimate.
std::vector<SymmetryPair> symmetry_pairs(const CGFEstimate& cgf);

}  // namespace nesschain
