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
#include <string>
#include <vector>

namespace nesschain {

/// Radial even polynomial U(x) = sum_k a_k |x|^{e_k}, x in R^d.
///
/// Exponents are powers of |x| and must be even and >= 2. The highest-order
/// coefficient must be positive so that U confines.
class PolynomialPotential {
 public:
  struct Term {
    int exponent;
    double coefficient;
    bool operator==(const Term&) const = default;
  };

  PolynomialPotential() = default;
  explicit PolynomialPotential(std::vector<Term> terms);

  /// |x|^2/2
  static PolynomialPotential harmonic(double stiffness = 1.0);
  /// |x|^2/2 + |x|^4/4
  static PolynomialPotential fpu();

  /// Parses "2:0.5,4:0.25" (exponent:coefficient pairs).
  static PolynomialPotential parse(const std::string& text);
  std::string to_string() const;

  const std::vector<Term>& terms() const noexcept { return terms_; }
  /// Highest exponent with a nonzero coefficient (0 if empty).
  int degree() const noexcept;
  double coefficient(int exponent) const noexcept;
  bool is_quadratic() const noexcept { return degree() == 2 && terms_.size() == 1; }

  /// Problems with this potential; empty when valid.
  std::vector<std::string> violations(const std::string& name) const;

  /// U as a function of r2 = |x|^2.
  double value_r2(double r2) const noexcept;
  /// dU/d(r2); the gradient is 2 * dU/d(r2) * x.
  double slope_r2(double r2) const noexcept;
  /// d^2U/d(r2)^2.
  double curvature_r2(double r2) const noexcept;

  /// Dense coefficients c_j of the force factor g(r2) = 2 dU/d(r2) = sum_j c_j r2^j.
  std::vector<double> force_polynomial() const;

  bool operator==(const PolynomialPotential&) const = default;

 private:
  std::vector<Term> terms_;  // sorted by exponent, merged
};

struct ReservoirSpec {
  double lambda = 0.5;       // coupling strength
  double gamma = 1.0;        // memory rate
  double temperature = 1.0;  // T = 1/beta

  bool operator==(const ReservoirSpec&) const = default;
};

/// Homogeneous chain of n sites in R^d, coupled at site 1 to the left bath and
/// at site n to the right bath.
struct ChainConfig {
  int n = 3;
  int d = 1;
  PolynomialPotential onsite = PolynomialPotential::fpu();
  PolynomialPotential interaction = PolynomialPotential::fpu();
  ReservoirSpec left{0.5, 1.0, 2.0};
  ReservoirSpec right{0.5, 1.0, 1.0};

  int dof() const noexcept { return n * d; }
  int bath_dof() const noexcept { return 2 * d; }
  bool is_harmonic() const noexcept { return onsite.is_quadratic() && interaction.is_quadratic(); }
  bool operator==(const ChainConfig&) const = default;
};

enum class Bath { left = 0, right = 1 };

/// Phase point in effective coordinates. Layout: q[j*d + c], p[j*d + c],
/// s[b*d + c] with b = 0 (left), 1 (right).
struct ChainState {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> s;

  static ChainState zero(const ChainConfig& config);
  bool is_finite() const noexcept;
  /// (q, p, s) concatenated.
  std::vector<double> flatten() const;
  bool operator==(const ChainState&) const = default;
};

/// Index of the boundary site a bath couples to.
inline int boundary_site(const ChainConfig& config, Bath b) {
  return b == Bath::left ? 0 : config.n - 1;
}
inline const ReservoirSpec& reservoir(const ChainConfig& config, Bath b) {
  return b == Bath::left ? config.left : config.right;
}

// Energies. All throw DimensionError on length mismatch.

double chain_potential(const ChainConfig& config, std::span<const double> q);
std::vector<double> chain_potential_grad(const ChainConfig& config, std::span<const double> q);
void chain_potential_grad(const ChainConfig& config, std::span<const double> q, std::span<double> grad);

/// V(q) - (lambda_L^2 |q_1|^2 + lambda_R^2 |q_n|^2) / 2
double effective_potential(const ChainConfig& config, std::span<const double> q);
void effective_potential_grad(const ChainConfig& config, std::span<const double> q, std::span<double> grad);

/// |p|^2/2 + V_eff(q): the chain energy whose generator image is the total flux.
double effective_hamiltonian(const ChainConfig& config, const ChainState& state);

/// G = |p|^2/2 + V_eff(q) + sum_b gamma_b |s_b|^2 / 2. Throws std::domain_error
/// on non-finite states.
double energy_G(const ChainConfig& config, const ChainState& state);

// Coordinate change between the auxiliary bath variables r (memory form) and
// the effective variables s:
//   s_b = (r_b / lambda_b - lambda_b q_{site(b)}) / sqrt(gamma_b)
//   r_b = lambda_b sqrt(gamma_b) s_b + lambda_b^2 q_{site(b)}
std::vector<double> r_to_s(const ChainConfig& config, std::span<const double> r, std::span<const double> q);
std::vector<double> s_to_r(const ChainConfig& config, std::span<const double> s, std::span<const double> q);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const noexcept { return errors.empty(); }
};

/// Checks every model invariant without throwing.
ValidationReport check_config(const ChainConfig& config);

/// Returns the config unchanged if valid; throws ConfigError listing every
/// violation otherwise. Warnings go to std::clog.
ChainConfig validate_config(ChainConfig config);

/// False when V_eff is not bounded below by a confining function (e.g. a
/// harmonic chain whose boundary renormalization makes the quadratic form
/// indefinite).
bool effective_potential_confines(const ChainConfig& config);

}  // namespace nesschain
