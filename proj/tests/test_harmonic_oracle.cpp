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

#include "nesschain/errors.hpp"
#include "nesschain/harmonic_oracle.hpp"

using namespace nesschain;

namespace {

ChainConfig harmonic_chain(int n, int d = 1) {
  ChainConfig c;
  c.n = n;
  c.d = d;
  c.onsite = PolynomialPotential::harmonic();
  c.interaction = PolynomialPotential::harmonic();
  return c;
}

}  // namespace

TEST(Lyapunov, ScalarOrnsteinUhlenbeck) {
  LinearSystem sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, -2.5);
  sys.B = Eigen::MatrixXd::Constant(1, 1, std::sqrt(2.0 * 1.7));
  const auto cov = solve_lyapunov(sys);
  EXPECT_NEAR(cov.sigma(0, 0), 1.7 / 2.5, 1e-14);
}

TEST(Linearize, RejectsAnharmonicChains) {
  ChainConfig c;
  EXPECT_THROW(linearize(c), ConfigError);
}

TEST(Linearize, DecoupledChainHasBlockStructure) {
  ChainConfig c = harmonic_chain(3);
  c.left.lambda = c.right.lambda = 0.0;
  const LinearSystem sys = linearize(c);
  EXPECT_EQ(sys.size(), 8);
  for (int j = 0; j < 3; ++j)
    for (int b = 0; b < 2; ++b) {
      EXPECT_EQ(sys.A(sys.p_index(j, 0), sys.s_index(b, 0)), 0.0);
      EXPECT_EQ(sys.A(sys.s_index(b, 0), sys.p_index(j, 0)), 0.0);
    }
  EXPECT_EQ(sys.A(sys.s_index(0, 0), sys.s_index(0, 0)), -1.0);
  // The isolated chain is conservative: purely imaginary spectrum.
  EXPECT_NEAR(spectral_abscissa(sys.A), 0.0, 1e-10);
  EXPECT_FALSE(is_hurwitz(sys.A));
  EXPECT_THROW(solve_lyapunov(sys), StabilityError);
}

TEST(Linearize, CouplingEntries) {
  ChainConfig c = harmonic_chain(2, 2);
  c.left = {0.6, 2.0, 1.5};
  const LinearSystem sys = linearize(c);
  EXPECT_DOUBLE_EQ(sys.A(sys.p_index(0, 1), sys.s_index(0, 1)), 0.6 * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(sys.A(sys.s_index(0, 1), sys.p_index(0, 1)), -0.6 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(sys.B(sys.s_index(0, 1), sys.s_index(0, 1)), std::sqrt(3.0));
  EXPECT_EQ(sys.B(sys.p_index(0, 0), sys.p_index(0, 0)), 0.0);
}

TEST(Lyapunov, EqualTemperaturesGiveGibbsCovariance) {
  ChainConfig c = harmonic_chain(4, 2);
  c.left = {0.5, 2.0, 1.3};
  c.right = {0.3, 0.7, 1.3};
  const LinearSystem sys = linearize(c);
  const auto cov = solve_lyapunov(sys);
  EXPECT_LT(cov.residual, 1e-10);
  const Eigen::MatrixXd hinv = effective_hessian(c).inverse();
  const int m = c.dof();
  EXPECT_LT((cov.sigma.topLeftCorner(m, m) - 1.3 * hinv).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((cov.sigma.block(m, m, m, m) - 1.3 * Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(cov.sigma(sys.s_index(0, 0), sys.s_index(0, 0)), 1.3 / 2.0, 1e-9);
  EXPECT_NEAR(cov.sigma(sys.s_index(1, 1), sys.s_index(1, 1)), 1.3 / 0.7, 1e-9);
  const MeanFlux f = mean_flux(c, sys, cov);
  EXPECT_NEAR(f.phi_left, 0.0, 1e-10);
  EXPECT_NEAR(f.sigma, 0.0, 1e-10);
}

TEST(Lyapunov, CovarianceIsSymmetricPositiveDefinite) {
  const ChainConfig c = harmonic_chain(5);
  const LinearSystem sys = linearize(c);
  const auto cov = solve_lyapunov(sys);
  EXPECT_LT((cov.sigma - cov.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(cov.sigma.llt().info(), Eigen::Success);
  EXPECT_NEAR(lyapunov_residual(sys, cov.sigma), cov.residual, 1e-15);
}

TEST(MeanFluxes, BalanceAndDirection) {
  for (int n : {1, 2, 3, 6}) {
    ChainConfig c = harmonic_chain(n);
    if (n == 1) c.onsite = PolynomialPotential::harmonic(2.0);
    const MeanFlux f = exact_mean_flux(c);
    EXPECT_NEAR(f.phi_left + f.phi_right, 0.0, 1e-12) << n;
    EXPECT_GT(f.phi_left, 0.0) << n;
    EXPECT_NEAR(f.sigma, f.phi_left / 2.0 + f.phi_right / 1.0, 1e-14);
    EXPECT_LT(f.sigma, 0.0);
    std::swap(c.left.temperature, c.right.temperature);
    const MeanFlux g = exact_mean_flux(c);
    EXPECT_NEAR(g.phi_right, f.phi_left, 1e-12) << n;
  }
}

TEST(MeanFluxes, ScalesWithTemperatureDifference) {
  ChainConfig c = harmonic_chain(3);
  const double a = exact_mean_flux(c).phi_left;
  c.left.temperature = 3.0;
  EXPECT_NEAR(exact_mean_flux(c).phi_left, 2.0 * a, 1e-12);
}

TEST(MeanFluxes, FrozenReferenceValues) {
  const ChainConfig c = harmonic_chain(3);
  const MeanFlux f = exact_mean_flux(c);
  EXPECT_NEAR(f.phi_left, 0.047750, 5e-7);
  EXPECT_NEAR(f.sigma, -0.023875, 5e-7);
  const LinearSystem sys = linearize(c);
  const auto t = exact_temperatures(sys, solve_lyapunov(sys));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_NEAR(t[0], 1.4981, 1e-4);
  EXPECT_NEAR(t[1], 1.5000, 1e-4);
  EXPECT_NEAR(t[2], 1.5019, 1e-4);
  for (double x : t) {
    EXPECT_LT(x, 2.0);
    EXPECT_GT(x, 1.0);
  }
  EXPECT_NEAR(spectral_abscissa(sys.A), -0.0082, 1e-4);
}

TEST(MeanFluxes, UnstableChainRejected) {
  ChainConfig c = harmonic_chain(2);
  c.left.lambda = c.right.lambda = 1.0;  // V_eff Hessian becomes singular
  EXPECT_THROW(exact_mean_flux(c), StabilityError);
}

TEST(Gibbs, HarmonicSiteMoments) {
  for (int d : {1, 2, 3}) {
    ChainConfig c = harmonic_chain(1, d);
    c.onsite = PolynomialPotential::harmonic(2.0);
    c.left.temperature = c.right.temperature = 0.8;
    // Effective stiffness 2 - (0.25 + 0.25)/2 * 2 = 1.5.
    const double v = 0.8 / 1.5;
    const GibbsMoments m = gibbs_quadrature_1site(c, 0.8);
    EXPECT_NEAR(m.q2, d * v, 1e-10) << d;
    EXPECT_NEAR(m.q4, d * (d + 2) * v * v, 1e-10) << d;
    EXPECT_NEAR(m.p2, d * 0.8, 1e-14) << d;
  }
}

TEST(Gibbs, PureQuarticSite) {
  ChainConfig c;
  c.n = 1;
  c.onsite = PolynomialPotential::parse("2:0.25,4:0.25");
  c.left.temperature = c.right.temperature = 1.0;
  const GibbsMoments m = gibbs_quadrature_1site(c, 1.0);
  EXPECT_NEAR(m.q2, 2.0 * std::tgamma(0.75) / std::tgamma(0.25), 1e-10);
  EXPECT_NEAR(m.q4, 1.0, 1e-10);
}

TEST(Gibbs, Preconditions) {
  ChainConfig c;
  EXPECT_THROW(gibbs_quadrature_1site(c, 1.0), ConfigError);
  c.n = 1;
  EXPECT_THROW(gibbs_quadrature_1site(c, 1.0), ConfigError);
}
