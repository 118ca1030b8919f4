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

#include "nesschain/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nesschain/errors.hpp"

namespace nesschain {

PolynomialPotential::PolynomialPotential(std::vector<Term> terms) {
  std::map<int, double> merged;
  for (const auto& t : terms) merged[t.exponent] += t.coefficient;
  for (const auto& [e, c] : merged) {
    if (c != 0.0) terms_.push_back({e, c});
  }
}

PolynomialPotential PolynomialPotential::harmonic(double stiffness) {
  return PolynomialPotential({{2, 0.5 * stiffness}});
}

PolynomialPotential PolynomialPotential::fpu() {
  return PolynomialPotential({{2, 0.5}, {4, 0.25}});
}

PolynomialPotential PolynomialPotential::parse(const std::string& text) {
  std::vector<Term> terms;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) { return std::isspace(ch); }),
               item.end());
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("polynomial term '" + item + "' is not of the form exponent:coefficient");
    }
    std::size_t used = 0;
    const std::string es = item.substr(0, colon);
    const std::string cs = item.substr(colon + 1);
    int e = 0;
    double c = 0.0;
    try {
      e = std::stoi(es, &used);
      if (used != es.size()) throw std::invalid_argument(es);
      c = std::stod(cs, &used);
      if (used != cs.size()) throw std::invalid_argument(cs);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("polynomial term '" + item + "' has a malformed number");
    }
    terms.push_back({e, c});
  }
  if (terms.empty()) throw std::invalid_argument("empty polynomial '" + text + "'");
  return PolynomialPotential(std::move(terms));
}

std::string PolynomialPotential::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) os << ',';
    os << terms_[i].exponent << ':' << terms_[i].coefficient;
  }
  return os.str();
}

int PolynomialPotential::degree() const noexcept {
  return terms_.empty() ? 0 : terms_.back().exponent;
}

double PolynomialPotential::coefficient(int exponent) const noexcept {
  for (const auto& t : terms_) {
    if (t.exponent == exponent) return t.coefficient;
  }
  return 0.0;
}

std::vector<std::string> PolynomialPotential::violations(const std::string& name) const {
  std::vector<std::string> out;
  if (terms_.empty()) {
    out.push_back(name + ": potential has no terms");
    return out;
  }
  for (const auto& t : terms_) {
    if (t.exponent < 2 || t.exponent % 2 != 0) {
      out.push_back(name + ": exponent " + std::to_string(t.exponent) + " must be even and >= 2");
    }
    if (!std::isfinite(t.coefficient)) {
      out.push_back(name + ": coefficient of |x|^" + std::to_string(t.exponent) + " is not finite");
    }
  }
  if (!(terms_.back().coefficient > 0.0)) {
    out.push_back(name + ": highest-order coefficient must be positive (confinement)");
  }
  return out;
}

double PolynomialPotential::value_r2(double r2) const noexcept {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coefficient * std::pow(r2, t.exponent / 2);
  return v;
}

double PolynomialPotential::slope_r2(double r2) const noexcept {
  double v = 0.0;
  for (const auto& t : terms_) {
    const int k = t.exponent / 2;
    v += t.coefficient * k * (k == 1 ? 1.0 : std::pow(r2, k - 1));
  }
  return v;
}

double PolynomialPotential::curvature_r2(double r2) const noexcept {
  double v = 0.0;
  for (const auto& t : terms_) {
    const int k = t.exponent / 2;
    if (k >= 2) v += t.coefficient * k * (k - 1) * (k == 2 ? 1.0 : std::pow(r2, k - 2));
  }
  return v;
}

std::vector<double> PolynomialPotential::force_polynomial() const {
  const int top = std::max(degree() / 2 - 1, 0);
  std::vector<double> c(static_cast<std::size_t>(top) + 1, 0.0);
  for (const auto& t : terms_) {
    const int k = t.exponent / 2;
    if (k >= 1) c[static_cast<std::size_t>(k - 1)] += 2.0 * k * t.coefficient;
  }
  return c;
}

ChainState ChainState::zero(const ChainConfig& config) {
  ChainState st;
  st.q.assign(static_cast<std::size_t>(config.dof()), 0.0);
  st.p.assign(static_cast<std::size_t>(config.dof()), 0.0);
  st.s.assign(static_cast<std::size_t>(config.bath_dof()), 0.0);
  return st;
}

bool ChainState::is_finite() const noexcept {
  auto fin = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return fin(q) && fin(p) && fin(s);
}

std::vector<double> ChainState::flatten() const {
  std::vector<double> out;
  out.reserve(q.size() + p.size() + s.size());
  out.insert(out.end(), q.begin(), q.end());
  out.insert(out.end(), p.begin(), p.end());
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

namespace {

void require_len(std::span<const double> v, int expected, const char* what) {
  if (static_cast<int>(v.size()) != expected) {
    throw DimensionError(std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " +
                         std::to_string(expected));
  }
}

double norm2(std::span<const double> x) {
  double r = 0.0;
  for (double v : x) r += v * v;
  return r;
}

}  // namespace

double chain_potential(const ChainConfig& config, std::span<const double> q) {
  require_len(q, config.dof(), "q");
  const auto d = static_cast<std::size_t>(config.d);
  double v = 0.0;
  for (int j = 0; j < config.n; ++j) v += config.onsite.value_r2(norm2(q.subspan(j * d, d)));
  for (int j = 0; j + 1 < config.n; ++j) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double x = q[j * d + c] - q[(j + 1) * d + c];
      r2 += x * x;
    }
    v += config.interaction.value_r2(r2);
  }
  return v;
}

void chain_potential_grad(const ChainConfig& config, std::span<const double> q, std::span<double> grad) {
  require_len(q, config.dof(), "q");
  require_len(grad, config.dof(), "gradient");
  const auto d = static_cast<std::size_t>(config.d);
  for (int j = 0; j < config.n; ++j) {
    const double g = 2.0 * config.onsite.slope_r2(norm2(q.subspan(j * d, d)));
    for (std::size_t c = 0; c < d; ++c) grad[j * d + c] = g * q[j * d + c];
  }
  for (int j = 0; j + 1 < config.n; ++j) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double x = q[j * d + c] - q[(j + 1) * d + c];
      r2 += x * x;
    }
    const double g = 2.0 * config.interaction.slope_r2(r2);
    for (std::size_t c = 0; c < d; ++c) {
      const double f = g * (q[j * d + c] - q[(j + 1) * d + c]);
      grad[j * d + c] += f;
      grad[(j + 1) * d + c] -= f;
    }
  }
}

std::vector<double> chain_potential_grad(const ChainConfig& config, std::span<const double> q) {
  std::vector<double> g(static_cast<std::size_t>(config.dof()));
  chain_potential_grad(config, q, g);
  return g;
}

double effective_potential(const ChainConfig& config, std::span<const double> q) {
  const double v = chain_potential(config, q);
  const auto d = static_cast<std::size_t>(config.d);
  const double left = config.left.lambda * config.left.lambda * norm2(q.subspan(0, d));
  const double right =
      config.right.lambda * config.right.lambda * norm2(q.subspan(static_cast<std::size_t>(config.n - 1) * d, d));
  return v - 0.5 * (left + right);
}

void effective_potential_grad(const ChainConfig& config, std::span<const double> q, std::span<double> grad) {
  chain_potential_grad(config, q, grad);
  const auto d = static_cast<std::size_t>(config.d);
  const auto last = static_cast<std::size_t>(config.n - 1) * d;
  const double kl = config.left.lambda * config.left.lambda;
  const double kr = config.right.lambda * config.right.lambda;
  for (std::size_t c = 0; c < d; ++c) {
    grad[c] -= kl * q[c];
    grad[last + c] -= kr * q[last + c];
  }
}

double effective_hamiltonian(const ChainConfig& config, const ChainState& state) {
  require_len(state.p, config.dof(), "p");
  return 0.5 * norm2(state.p) + effective_potential(config, state.q);
}

double energy_G(const ChainConfig& config, const ChainState& state) {
  require_len(state.s, config.bath_dof(), "s");
  if (!state.is_finite()) throw std::domain_error("energy_G: state has non-finite entries");
  const auto d = static_cast<std::size_t>(config.d);
  std::span<const double> s(state.s);
  const double bath = config.left.gamma * norm2(s.subspan(0, d)) + config.right.gamma * norm2(s.subspan(d, d));
  return effective_hamiltonian(config, state) + 0.5 * bath;
}

namespace {

void require_invertible(const ChainConfig& config) {
  std::vector<std::string> bad;
  for (Bath b : {Bath::left, Bath::right}) {
    const auto& r = reservoir(config, b);
    const std::string name = b == Bath::left ? "left" : "right";
    if (!(r.lambda > 0.0)) bad.push_back(name + ".lambda must be > 0 for the r <-> s map");
    if (!(r.gamma > 0.0)) bad.push_back(name + ".gamma must be > 0 for the r <-> s map");
  }
  if (!bad.empty()) throw ConfigError(bad);
}

}  // namespace

std::vector<double> r_to_s(const ChainConfig& config, std::span<const double> r, std::span<const double> q) {
  require_len(r, config.bath_dof(), "r");
  require_len(q, config.dof(), "q");
  require_invertible(config);
  const auto d = static_cast<std::size_t>(config.d);
  std::vector<double> s(2 * d);
  for (Bath b : {Bath::left, Bath::right}) {
    const auto& res = reservoir(config, b);
    const auto blk = static_cast<std::size_t>(b) * d;
    const auto site = static_cast<std::size_t>(boundary_site(config, b)) * d;
    const double scale = 1.0 / std::sqrt(res.gamma);
    for (std::size_t c = 0; c < d; ++c) {
      s[blk + c] = scale * (r[blk + c] / res.lambda) - scale * (res.lambda * q[site + c]);
    }
  }
  return s;
}

std::vector<double> s_to_r(const ChainConfig& config, std::span<const double> s, std::span<const double> q) {
  require_len(s, config.bath_dof(), "s");
  require_len(q, config.dof(), "q");
  require_invertible(config);
  const auto d = static_cast<std::size_t>(config.d);
  std::vector<double> r(2 * d);
  for (Bath b : {Bath::left, Bath::right}) {
    const auto& res = reservoir(config, b);
    const auto blk = static_cast<std::size_t>(b) * d;
    const auto site = static_cast<std::size_t>(boundary_site(config, b)) * d;
    const double fg = res.lambda * std::sqrt(res.gamma);
    for (std::size_t c = 0; c < d; ++c) {
      r[blk + c] = fg * s[blk + c] + res.lambda * res.lambda * q[site + c];
    }
  }
  return r;
}

bool effective_potential_confines(const ChainConfig& config) {
  if (config.onsite.degree() > 2) return true;
  const int n = config.n;
  const double a1 = config.onsite.coefficient(2);
  const double a2 = config.interaction.coefficient(2);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) h(j, j) += 2.0 * a1;
  for (int j = 0; j + 1 < n; ++j) {
    h(j, j) += 2.0 * a2;
    h(j + 1, j + 1) += 2.0 * a2;
    h(j, j + 1) -= 2.0 * a2;
    h(j + 1, j) -= 2.0 * a2;
  }
  h(0, 0) -= config.left.lambda * config.left.lambda;
  h(n - 1, n - 1) -= config.right.lambda * config.right.lambda;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() > 0.0) return true;
  // A superquadratic interaction confines every direction except uniform
  // translation, which only the on-site quadratic form controls.
  if (config.interaction.degree() > 2 && n > 1) return h.sum() > 0.0;
  return false;
}

ValidationReport check_config(const ChainConfig& config) {
  ValidationReport rep;
  if (config.n < 1) rep.errors.push_back("n = " + std::to_string(config.n) + " violates n >= 1");
  if (config.d < 1) rep.errors.push_back("d = " + std::to_string(config.d) + " violates d >= 1");
  auto add = [&rep](std::vector<std::string> v) { rep.errors.insert(rep.errors.end(), v.begin(), v.end()); };
  add(config.onsite.violations("onsite"));
  add(config.interaction.violations("interaction"));
  for (Bath b : {Bath::left, Bath::right}) {
    const auto& r = reservoir(config, b);
    const std::string name = b == Bath::left ? "left" : "right";
    auto positive = [&](double v, const char* field) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        rep.errors.push_back(name + "." + field + " = " + std::to_string(v) + " must be finite and > 0");
      }
    };
    positive(r.lambda, "lambda");
    positive(r.gamma, "gamma");
    positive(r.temperature, "temperature");
  }
  const int m1 = config.onsite.degree();
  const int m2 = config.interaction.degree();
  if (m1 != 0 && m2 != 0 && m2 < m1) {
    rep.errors.push_back("interaction degree " + std::to_string(m2) + " < onsite degree " + std::to_string(m1) +
                         " (requires m2 >= m1 >= 2; energy can pile up on-site as breathers)");
  }
  if (!rep.errors.empty()) return rep;

  if (config.n > 1 && config.interaction.coefficient(2) == 0.0) {
    rep.warnings.push_back(
        "interaction has no |x|^2 term: the bond Hessian is singular at zero separation (non-degeneracy proxy)");
  }
  if (!effective_potential_confines(config)) {
    rep.warnings.push_back("effective potential is not confining for these couplings (lambda too large)");
  }
  return rep;
}

ChainConfig validate_config(ChainConfig config) {
  const auto rep = check_config(config);
  if (!rep.ok()) throw ConfigError(rep.errors);
  for (const auto& w : rep.warnings) std::clog << "warning: " << w << '\n';
  return config;
}

}  // namespace nesschain
