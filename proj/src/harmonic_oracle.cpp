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

#include "nesschain/harmonic_oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "nesschain/errors.hpp"

namespace nesschain {

Eigen::MatrixXd effective_hessian(const ChainConfig& config) {
  if (!config.onsite.is_quadratic() || !config.interaction.is_quadratic()) {
    throw ConfigError("harmonic oracle needs purely quadratic onsite and interaction potentials");
  }
  const int n = config.n;
  const int d = config.d;
  const double k0 = 2.0 * config.onsite.coefficient(2);
  const double k1 = 2.0 * config.interaction.coefficient(2);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * d, n * d);
  for (int c = 0; c < d; ++c) {
    for (int j = 0; j < n; ++j) h(j * d + c, j * d + c) += k0;
    for (int j = 0; j + 1 < n; ++j) {
      const int a = j * d + c;
      const int b = (j + 1) * d + c;
      h(a, a) += k1;
      h(b, b) += k1;
      h(a, b) -= k1;
      h(b, a) -= k1;
    }
    h(c, c) -= config.left.lambda * config.left.lambda;
    h((n - 1) * d + c, (n - 1) * d + c) -= config.right.lambda * config.right.lambda;
  }
  return h;
}

LinearSystem linearize(const ChainConfig& config) {
  if (config.n < 1 || config.d < 1) throw ConfigError("n and d must be >= 1");
  const Eigen::MatrixXd h = effective_hessian(config);
  LinearSystem sys;
  sys.n = config.n;
  sys.d = config.d;
  const int nd = config.n * config.d;
  const int m = 2 * nd + 2 * config.d;
  sys.A = Eigen::MatrixXd::Zero(m, m);
  sys.B = Eigen::MatrixXd::Zero(m, m);
  sys.A.block(0, nd, nd, nd) = Eigen::MatrixXd::Identity(nd, nd);
  sys.A.block(nd, 0, nd, nd) = -h;
  for (int b = 0; b < 2; ++b) {
    const auto& r = reservoir(config, static_cast<Bath>(b));
    if (!(r.gamma > 0.0) || !(r.temperature > 0.0) || r.lambda < 0.0) {
      throw ConfigError("linearize needs gamma > 0, T > 0 and lambda >= 0");
    }
    const int site = boundary_site(config, static_cast<Bath>(b));
    const double sg = std::sqrt(r.gamma);
    for (int c = 0; c < config.d; ++c) {
      const int pi = sys.p_index(site, c);
      const int si = sys.s_index(b, c);
      sys.A(pi, si) += r.lambda * sg;
      sys.A(si, pi) -= r.lambda / sg;
      sys.A(si, si) = -r.gamma;
      sys.B(si, si) = std::sqrt(2.0 * r.temperature);
    }
  }
  return sys;
}

std::vector<std::complex<double>> spectrum(const Eigen::MatrixXd& a) {
  const Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  std::vector<std::complex<double>> out(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return out;
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : spectrum(a)) best = std::max(best, z.real());
  return best;
}

bool is_hurwitz(const Eigen::MatrixXd& a, double tol) { return spectral_abscissa(a) < -tol; }

double lyapunov_residual(const LinearSystem& system, const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd r = system.A * sigma + sigma * system.A.transpose() + system.B * system.B.transpose();
  return r.cwiseAbs().maxCoeff();
}

StationaryCovariance solve_lyapunov(const LinearSystem& system) {
  const double abscissa = spectral_abscissa(system.A);
  if (!(abscissa < -1e-10)) {
    std::ostringstream os;
    os << "drift matrix is not Hurwitz (spectral abscissa " << abscissa << "); no stationary state";
    throw StabilityError(os.str());
  }
  const Eigen::Index m = system.A.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  // vec(A S + S A^T) = (I kron A + A kron I) vec(S), column-major vec.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m * m, m * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      k.block(i * m, j * m, m, m) += id(i, j) * system.A;
      k.block(i * m, j * m, m, m) += system.A(i, j) * id;
    }
  }
  const Eigen::MatrixXd q = system.B * system.B.transpose();
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), m * m);
  const Eigen::VectorXd x = k.fullPivLu().solve(rhs);
  StationaryCovariance out;
  out.sigma = Eigen::Map<const Eigen::MatrixXd>(x.data(), m, m);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.residual = lyapunov_residual(system, out.sigma);
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (!(out.residual < 1e-10 * scale)) {
    std::ostringstream os;
    os << "Lyapunov residual " << out.residual << " above tolerance";
    throw StabilityError(os.str());
  }
  return out;
}

MeanFlux mean_flux(const ChainConfig& config, const LinearSystem& system, const StationaryCovariance& cov) {
  MeanFlux out;
  double phi[2] = {0.0, 0.0};
  for (int b = 0; b < 2; ++b) {
    const auto& r = reservoir(config, static_cast<Bath>(b));
    const int site = boundary_site(config, static_cast<Bath>(b));
    for (int c = 0; c < config.d; ++c) {
      phi[b] += r.lambda * std::sqrt(r.gamma) * cov.sigma(system.p_index(site, c), system.s_index(b, c));
    }
  }
  out.phi_left = phi[0];
  out.phi_right = phi[1];
  out.sigma = phi[0] / config.left.temperature + phi[1] / config.right.temperature;
  return out;
}

MeanFlux exact_mean_flux(const ChainConfig& config) {
  const LinearSystem sys = linearize(config);
  return mean_flux(config, sys, solve_lyapunov(sys));
}

std::vector<double> exact_temperatures(const LinearSystem& system, const StationaryCovariance& cov) {
  std::vector<double> out(static_cast<std::size_t>(system.n), 0.0);
  for (int j = 0; j < system.n; ++j) {
    for (int c = 0; c < system.d; ++c) out[static_cast<std::size_t>(j)] += cov.sigma(system.p_index(j, c), system.p_index(j, c));
    out[static_cast<std::size_t>(j)] /= system.d;
  }
  return out;
}

GibbsMoments gibbs_quadrature_1site(const ChainConfig& config, double temperature) {
  std::vector<std::string> bad;
  if (config.n != 1) bad.push_back("gibbs_quadrature_1site needs n = 1");
  if (!(temperature > 0.0)) bad.push_back("temperature must be > 0");
  if (config.left.temperature != config.right.temperature || config.left.temperature != temperature) {
    bad.push_back("gibbs_quadrature_1site needs T_L = T_R = T");
  }
  if (!bad.empty()) throw ConfigError(bad);
  const double soft = 0.5 * (config.left.lambda * config.left.lambda + config.right.lambda * config.right.lambda);
  auto veff = [&](double r) { return config.onsite.value_r2(r * r) - soft * r * r; };
  // Shift by the minimum on a coarse grid so the weights stay O(1).
  double vmin = 0.0;
  for (int i = 1; i <= 4000; ++i) vmin = std::min(vmin, veff(0.005 * i));
  const int d = config.d;
  boost::math::quadrature::exp_sinh<double> integrator;
  auto moment = [&](int power) {
    auto f = [&](double r) {
      // exp_sinh probes huge r where V_eff is inf (or inf - inf).
      const double e = (veff(r) - vmin) / temperature;
      if (!(e < 700.0)) return 0.0;
      return std::exp(-e) * std::pow(r, d - 1 + power);
    };
    double err = 0.0;
    double l1 = 0.0;
    const double val = integrator.integrate(f, 1e-14, &err, &l1);
    if (!std::isfinite(val) || err > 1e-10 * std::max(1.0, std::abs(val))) {
      throw std::runtime_error("Gibbs quadrature did not converge");
    }
    return val;
  };
  const double z = moment(0);
  GibbsMoments out;
  out.q2 = moment(2) / z;
  out.q4 = moment(4) / z;
  out.p2 = d * temperature;
  return out;
}

}  // namespace nesschain
