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

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "nesschain/model.hpp"

namespace nesschain {

/// Linear SDE dx = A x dt + B dw for a harmonic chain, with x ordered as
/// (q, p, s) in the same layout as ChainState::flatten().
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  int n = 0;
  int d = 0;

  int size() const noexcept { return static_cast<int>(A.rows()); }
  int q_index(int site, int c) const noexcept { return site * d + c; }
  int p_index(int site, int c) const noexcept { return n * d + site * d + c; }
  int s_index(int bath, int c) const noexcept { return 2 * n * d + bath * d + c; }
};

/// Requires purely quadratic potentials; throws ConfigError otherwise.
/// lambda = 0 is accepted here (decoupled chain).
LinearSystem linearize(const ChainConfig& config);

/// Hessian of V_eff over q (n*d square).
Eigen::MatrixXd effective_hessian(const ChainConfig& config);

std::vector<std::complex<double>> spectrum(const Eigen::MatrixXd& a);
/// Largest real part of the spectrum.
double spectral_abscissa(const Eigen::MatrixXd& a);
/// All real parts below -tol.
bool is_hurwitz(const Eigen::MatrixXd& a, double tol = 1e-10);

struct StationaryCovariance {
  Eigen::MatrixXd sigma;
  double residual = 0.0;  // max-norm of A S + S A^T + B B^T
};

/// Dense Kronecker-form solve of A S + S A^T + B B^T = 0. Throws
/// StabilityError when A is not Hurwitz or the residual exceeds 1e-10
/// (relative to the scale of B B^T).
StationaryCovariance solve_lyapunov(const LinearSystem& system);
double lyapunov_residual(const LinearSystem& system, const Eigen::MatrixXd& sigma);

struct MeanFlux {
  double phi_left = 0.0;
  double phi_right = 0.0;
  double sigma = 0.0;
};

/// Exact stationary means for a stable harmonic chain.
MeanFlux exact_mean_flux(const ChainConfig& config);
MeanFlux mean_flux(const ChainConfig& config, const LinearSystem& system, const StationaryCovariance& cov);

/// Stationary <|p_j|^2>/d per site.
std::vector<double> exact_temperatures(const LinearSystem& system, const StationaryCovariance& cov);

/// Stationary <|q|^2>, <|q|^4>, <|p|^2> of a single site in equilibrium.
struct GibbsMoments {
  double q2 = 0.0;
  double q4 = 0.0;
  double p2 = 0.0;
};

/// Equilibrium moments of a one-site chain (n = 1, T_L = T_R = T) by
/// quadrature of exp(-V_eff/T) over the radial coordinate. Throws
/// ConfigError when preconditions fail and std::runtime_error when the
/// quadrature does not converge.
GibbsMoments gibbs_quadrature_1site(const ChainConfig& config, double temperature);

}  // namespace nesschain
