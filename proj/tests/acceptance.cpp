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

// Acceptance driver. Prints one PASS/FAIL line per criterion and writes the
// underlying numbers as CSV files under --out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nesschain/cli.hpp"
#include "nesschain/dynamics.hpp"
#include "nesschain/fluctuation.hpp"
#include "nesschain/harmonic_oracle.hpp"
#include "nesschain/model.hpp"
#include "nesschain/observables.hpp"
#include "nesschain/spde_gl.hpp"

namespace fs = std::filesystem;
using namespace nesschain;
using cli::format_double;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

fs::path g_out;
std::uint64_t g_seed = 20260417;
int g_threads = 0;

class CsvFile {
 public:
  CsvFile(const std::string& name, const std::vector<std::string>& header) : out_(g_out / name) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string fd(double x) { return format_double(x); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string pm(double m, double se) { return fmt("%.5g", m) + "+-" + fmt("%.2g", se); }

bool within(double x, double ref, double se, double k = 3.0) { return std::abs(x - ref) <= k * se; }

ChainConfig harmonic_default() {
  ChainConfig c;
  c.onsite = PolynomialPotential::harmonic();
  c.interaction = PolynomialPotential::harmonic();
  return c;
}

ChainState uniform_state(const ChainConfig& c, std::uint32_t stream) {
  ChainState s = ChainState::zero(c);
  std::vector<double> u(s.q.size() + s.p.size() + s.s.size());
  NoiseStream(g_seed, stream).uniforms(0, u);
  std::size_t i = 0;
  for (double& x : s.q) x = 2.0 * u[i++] - 1.0;
  for (double& x : s.p) x = 2.0 * u[i++] - 1.0;
  for (double& x : s.s) x = 2.0 * u[i++] - 1.0;
  return s;
}

// Criteria 1-3 ---------------------------------------------------------------

struct OracleRun {
  TrajectoryStats stats;
  MeanFlux exact;
  std::vector<double> exact_t;
};

const OracleRun& oracle_run() {
  static const OracleRun run = [] {
    OracleRun r;
    const ChainConfig c = harmonic_default();
    const LinearSystem sys = linearize(c);
    const auto cov = solve_lyapunov(sys);
    r.exact = mean_flux(c, sys, cov);
    r.exact_t = exact_temperatures(sys, cov);
    ChainState st = ChainState::zero(c);
    const RunLength len{22'000'000, 2'000'000, 32, 64};
    r.stats = simulate(c, {Scheme::splitting, 1e-3, 1e12}, st, len, NoiseStream(g_seed, 1));
    CsvFile csv("c1_oracle.csv", {"quantity", "exact", "simulated", "stderr"});
    const Estimate pl = r.stats.phi_left.estimate(), pr = r.stats.phi_right.estimate();
    const Estimate pt = r.stats.phi_total.estimate(), sg = r.stats.sigma.estimate();
    csv.row({"phi_L", fd(r.exact.phi_left), fd(pl.mean), fd(pl.std_error)});
    csv.row({"phi_R", fd(r.exact.phi_right), fd(pr.mean), fd(pr.std_error)});
    csv.row({"phi_total", "0", fd(pt.mean), fd(pt.std_error)});
    csv.row({"sigma", fd(r.exact.sigma), fd(sg.mean), fd(sg.std_error)});
    const auto prof = kinetic_temperature_profile(r.stats);
    for (std::size_t j = 0; j < prof.size(); ++j) {
      csv.row({"T_" + std::to_string(j + 1), fd(r.exact_t[j]), fd(prof[j].mean), fd(prof[j].std_error)});
    }
    return r;
  }();
  return run;
}

Verdict criterion1() {
  const OracleRun& r = oracle_run();
  const Estimate pl = r.stats.phi_left.estimate(), pr = r.stats.phi_right.estimate();
  bool ok = within(pl.mean, r.exact.phi_left, pl.std_error) && within(pr.mean, r.exact.phi_right, pr.std_error);
  std::string d = "2e7 steps dt=1e-3 splitting; phi_L " + pm(pl.mean, pl.std_error) + " vs " +
                  fmt("%.5g", r.exact.phi_left) + ", phi_R " + pm(pr.mean, pr.std_error) + " vs " +
                  fmt("%.5g", r.exact.phi_right);
  const auto prof = kinetic_temperature_profile(r.stats);
  for (std::size_t j = 0; j < prof.size(); ++j) {
    ok = ok && within(prof[j].mean, r.exact_t[j], prof[j].std_error);
    d += ", T" + std::to_string(j + 1) + " " + pm(prof[j].mean, prof[j].std_error) + " vs " + fmt("%.4f", r.exact_t[j]);
  }
  return {ok, d};
}

Verdict criterion2() {
  const Estimate pt = oracle_run().stats.phi_total.estimate();
  return {std::abs(pt.mean) < 3.0 * pt.std_error, "phi_L+phi_R = " + pm(pt.mean, pt.std_error)};
}

Verdict criterion3() {
  const auto& s = oracle_run().stats;
  const Estimate pl = s.phi_left.estimate(), pr = s.phi_right.estimate();
  return {pl.mean > 3.0 * pl.std_error && pr.mean < -3.0 * pr.std_error,
          "phi_L/se = " + fmt("%.1f", pl.mean / pl.std_error) + ", phi_R/se = " + fmt("%.1f", pr.mean / pr.std_error)};
}

// Criterion 4 ----------------------------------------------------------------

Verdict criterion4() {
  ChainConfig c;
  c.n = 5;
  ChainState st = ChainState::zero(c);
  const RunLength len{11'000'000, 1'000'000, 32, 64};
  const TrajectoryStats s = simulate(c, {Scheme::splitting, 1e-3, 1e12}, st, len, NoiseStream(g_seed, 2));
  const auto prof = kinetic_temperature_profile(s);
  CsvFile csv("c4_profile.csv", {"site", "T_j", "stderr"});
  bool ok = true;
  std::string d = "FPU n=5, 1e7 steps:";
  for (std::size_t j = 0; j < prof.size(); ++j) {
    csv.row({std::to_string(j + 1), fd(prof[j].mean), fd(prof[j].std_error)});
    ok = ok && prof[j].mean >= 1.0 - 3.0 * prof[j].std_error && prof[j].mean <= 2.0 + 3.0 * prof[j].std_error;
    d += " " + pm(prof[j].mean, prof[j].std_error);
  }
  return {ok, d};
}

// Criterion 5 ----------------------------------------------------------------

class SiteMoments : public Observer {
 public:
  explicit SiteMoments(long burn_in) : burn_in_(burn_in) {}
  void begin(const ChainConfig&, long n_steps, double) override {
    q2_ = BatchAccumulator(n_steps - burn_in_, 32);
    q4_ = q2_;
    p2_ = q2_;
  }
  void observe(long step, double, const ChainState& st, const FluxSample&) override {
    if (step < burn_in_) return;
    const double r2 = st.q[0] * st.q[0];
    q2_.push(r2);
    q4_.push(r2 * r2);
    p2_.push(st.p[0] * st.p[0]);
  }
  BatchAccumulator q2_{0, 32}, q4_{0, 32}, p2_{0, 32};

 private:
  long burn_in_;
};

Verdict criterion5() {
  ChainConfig c;
  c.n = 1;
  c.left.temperature = c.right.temperature = 1.0;
  const GibbsMoments g = gibbs_quadrature_1site(c, 1.0);
  ChainState st = ChainState::zero(c);
  SiteMoments mom(1'000'000);
  Observer* obs[] = {&mom};
  const TrajectoryStats s =
      simulate(c, {Scheme::splitting, 1e-3, 1e12}, st, {11'000'000, 1'000'000, 32, 64}, NoiseStream(g_seed, 3), obs);
  const Estimate q2 = mom.q2_.series().estimate(), q4 = mom.q4_.series().estimate(), p2 = mom.p2_.series().estimate();
  const Estimate sg = s.sigma.estimate();
  CsvFile csv("c5_gibbs.csv", {"quantity", "quadrature", "simulated", "stderr"});
  csv.row({"q2", fd(g.q2), fd(q2.mean), fd(q2.std_error)});
  csv.row({"q4", fd(g.q4), fd(q4.mean), fd(q4.std_error)});
  csv.row({"p2", fd(g.p2), fd(p2.mean), fd(p2.std_error)});
  csv.row({"sigma", "0", fd(sg.mean), fd(sg.std_error)});
  const bool ok = within(q2.mean, g.q2, q2.std_error) && within(q4.mean, g.q4, q4.std_error) &&
                  within(p2.mean, g.p2, p2.std_error) && within(sg.mean, 0.0, sg.std_error);
  return {ok, "<q2> " + pm(q2.mean, q2.std_error) + " vs " + fmt("%.5f", g.q2) + ", <q4> " + pm(q4.mean, q4.std_error) +
                  " vs " + fmt("%.5f", g.q4) + ", <p2> " + pm(p2.mean, p2.std_error) + " vs " + fmt("%.5f", g.p2) +
                  ", <sigma> " + pm(sg.mean, sg.std_error)};
}

// Criterion 6 ----------------------------------------------------------------

// Largest |H_eff(t) - H_eff(0) - sum phi dt| over a path of length t_end. The
// path at step h uses the pairwise-summed increments of the path at h/2, so
// both discretize the same Brownian path.
double balance_error(const ChainConfig& c, Scheme scheme, double h, int level, double t_end, ChainState st,
                     const NoiseStream& noise) {
  const int fine_per_step = 1 << level;
  const long n = std::lround(t_end / h);
  const int m = c.bath_dof();
  std::vector<double> xi(static_cast<std::size_t>(m)), sub(static_cast<std::size_t>(m));
  const IntegratorSpec in{scheme, h, 1e12};
  const double h0 = effective_hamiltonian(c, st);
  double integral = 0.0, worst = 0.0;
  for (long k = 0; k < n; ++k) {
    std::fill(xi.begin(), xi.end(), 0.0);
    for (int f = 0; f < fine_per_step; ++f) {
      noise.gaussians(static_cast<std::uint64_t>(k * fine_per_step + f), sub);
      for (int i = 0; i < m; ++i) xi[static_cast<std::size_t>(i)] += sub[static_cast<std::size_t>(i)];
    }
    for (double& x : xi) x /= std::sqrt(static_cast<double>(fine_per_step));
    const FluxSample f = flux(c, st);
    integral += (f.phi_left + f.phi_right) * h;
    advance(c, in, st, xi);
    worst = std::max(worst, std::abs(effective_hamiltonian(c, st) - h0 - integral));
  }
  return worst;
}

struct BalanceRow {
  Scheme scheme;
  double h;
  double mean_error;
  double se;
};

std::vector<BalanceRow> balance_table(Scheme scheme, const std::vector<double>& hs) {
  const ChainConfig c;
  const int paths = 32;
  const double t_end = 10.0;
  std::vector<BalanceRow> rows;
  std::vector<ChainState> starts;
  for (int p = 0; p < paths; ++p) {
    ChainState st = ChainState::zero(c);
    simulate(c, {Scheme::splitting, 1e-3, 1e12}, st, {20000, 0, 8, 64}, NoiseStream(g_seed, 600 + p));
    starts.push_back(st);
  }
  const double h_fine = hs.back();
  for (double h : hs) {
    const int level = static_cast<int>(std::lround(std::log2(h / h_fine)));
    BatchSeries e;
    for (int p = 0; p < paths; ++p) {
      e.add_batch(balance_error(c, scheme, h, level, t_end, starts[static_cast<std::size_t>(p)],
                                NoiseStream(g_seed, 700 + p)));
    }
    const Estimate est = e.estimate();
    rows.push_back({scheme, h, est.mean, est.std_error});
  }
  return rows;
}

Verdict criterion6() {
  const std::vector<double> hs{2e-3, 1e-3, 5e-4};
  const auto em = balance_table(Scheme::euler_maruyama, hs);
  const auto sp = balance_table(Scheme::splitting, hs);
  CsvFile csv("c6_energy_balance.csv", {"scheme", "dt", "mean_max_error", "stderr"});
  for (const auto* t : {&em, &sp}) {
    for (const auto& r : *t) csv.row({to_string(r.scheme), fd(r.h), fd(r.mean_error), fd(r.se)});
  }
  // Euler-Maruyama has strong order 1 for additive noise: halving dt halves the error.
  bool ok = true;
  std::string d = "Euler ratios";
  for (std::size_t i = 0; i + 1 < em.size(); ++i) {
    const double ratio = em[i].mean_error / em[i + 1].mean_error;
    ok = ok && std::abs(ratio - 2.0) <= 0.3 * 2.0;
    d += " " + fmt("%.3f", ratio);
  }
  d += " (theory 2); splitting ratios";
  for (std::size_t i = 0; i + 1 < sp.size(); ++i) d += " " + fmt("%.3f", sp[i].mean_error / sp[i + 1].mean_error);
  d += "; errors at dt=5e-4: Euler " + fmt("%.3g", em.back().mean_error) + ", splitting " +
       fmt("%.3g", sp.back().mean_error);
  return {ok, d};
}

// Criterion 7 ----------------------------------------------------------------

Verdict criterion7() {
  ChainConfig c;
  c.d = 2;
  c.left = {0.7, 1.3, 2.0};
  c.right = {0.4, 0.8, 1.0};
  ChainState s = uniform_state(c, 70);
  RawState r = to_raw(c, s);
  const NoiseStream noise(g_seed, 71);
  std::vector<double> xi(static_cast<std::size_t>(c.bath_dof()));
  const IntegratorSpec in{Scheme::euler_maruyama, 1e-3, 1e12};
  double worst = 0.0;
  for (long k = 0; k < 10000; ++k) {
    noise.gaussians(static_cast<std::uint64_t>(k), xi);
    advance(c, in, s, xi);
    raw_euler_step(c, in.dt, r, xi);
    const auto a = s.flatten();
    const auto b = from_raw(c, r).flatten();
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  CsvFile csv("c7_equivalence.csv", {"steps", "max_abs_difference"});
  csv.row({"10000", fd(worst)});
  return {worst < 1e-10, "max |x_s - map(x_r)| over 1e4 steps = " + fmt("%.2e", worst)};
}

// Criterion 8 ----------------------------------------------------------------

Verdict criterion8() {
  ChainConfig c;
  c.n = 2;
  c.left = {1.0, 1.0, 1.2};
  c.right = {1.0, 1.0, 1.0};
  GCTestSpec spec;
  spec.trajectories = 4000;
  spec.horizon = 400.0;
  spec.burn_in = 200.0;
  spec.integrator = {Scheme::splitting, 2e-3, 1e12};
  spec.seed = g_seed;
  spec.threads = g_threads;
  spec.cgf.seed = g_seed;
  const GCReport rep = gc_symmetry_test(c, spec);
  const auto& cor = rep.corrected;

  CsvFile cgf("c8_cgf.csv", {"functional", "horizon", "eta", "e_eta", "ci_lo", "ci_hi"});
  for (const FunctionalAnalysis* fa : {&rep.corrected, &rep.raw}) {
    for (auto [t, e] : {std::pair{spec.horizon, &fa->cgf_t}, {2 * spec.horizon, &fa->cgf_2t}}) {
      for (std::size_t j = 0; j < e->eta_grid.size(); ++j) {
        cgf.row({fa->name, fd(t), fd(e->eta_grid[j]), fd(e->e_values[j]), fd(e->ci_lo[j]), fd(e->ci_hi[j])});
      }
    }
  }
  CsvFile ratio("c8_ratio.csv", {"functional", "u", "log_ratio", "stderr"});
  for (const auto& b : cor.ratio_t.bins) ratio.row({cor.name, fd(b.u), fd(b.log_ratio), fd(b.std_error)});
  for (const auto& b : rep.control_ratio.bins) ratio.row({"control", fd(b.u), fd(b.log_ratio), fd(b.std_error)});

  bool pairs_ok = true;
  std::string d = "(a)";
  for (const auto& p : cor.pairs_t) {
    if (std::abs(p.eta - 0.2) > 1e-9 && std::abs(p.eta - 0.3) > 1e-9) continue;
    pairs_ok = pairs_ok && p.consistent;
    d += " |e(" + fmt("%.1f", p.eta) + ")-e(" + fmt("%.1f", 1 - p.eta) + ")|=" + fmt("%.2e", std::abs(p.difference)) +
         " ci " + fmt("%.2e", p.combined_ci) + " (paired [" + fmt("%.1e", p.paired_ci_lo) + "," +
         fmt("%.1e", p.paired_ci_hi) + "])";
  }
  const bool slope_ok = cor.ratio_t.available && std::abs(cor.ratio_t.slope - rep.predicted_slope) <= 0.2;
  d += "; (b) slope " + (cor.ratio_t.available ? pm(cor.ratio_t.slope, cor.ratio_t.slope_se) : cor.ratio_t.message) +
       " vs 1";
  const bool control_ok = rep.has_control && rep.control_ratio.available &&
                          std::abs(rep.control_ratio.slope) <= 3.0 * rep.control_ratio.slope_se;
  d += "; (c) control slope " +
       (rep.control_ratio.available ? pm(rep.control_ratio.slope, rep.control_ratio.slope_se) : rep.control_ratio.message);
  d += "; N=4000 t=400 lambda=1, X = -(beta_L-beta_R)(Q_L-Q_R)/2";
  return {pairs_ok && slope_ok && control_ok, d};
}

// Criterion 9 ----------------------------------------------------------------

struct SyncResult {
  std::vector<DistanceSample> samples;
  std::optional<double> slope;
};

SyncResult sync_run(const ChainConfig& c, double t_end, double t_fit_lo, double t_fit_hi, std::uint32_t stream) {
  SyncResult r;
  const IntegratorSpec in{Scheme::splitting, 1e-3, 1e12};
  const long n = std::lround(t_end / in.dt);
  r.samples = synchronous_pair(c, in, uniform_state(c, stream), uniform_state(c, stream + 1), n,
                               NoiseStream(g_seed, stream + 2), 1000);
  r.slope = fit_log_slope(r.samples, t_fit_lo, t_fit_hi, 1e-13);
  return r;
}

// Top Lyapunov exponent of the noise-driven flow: a neighbouring copy under
// the same noise, renormalized to distance d0 every `every` time units.
double top_lyapunov(const ChainConfig& c, double t_end, double every, std::uint32_t stream) {
  const IntegratorSpec in{Scheme::splitting, 1e-3, 1e12};
  ChainState a = ChainState::zero(c);
  simulate(c, in, a, {200000, 0, 8, 64}, NoiseStream(g_seed, stream));
  ChainState b = a;
  const double d0 = 1e-8;
  b.q[0] += d0;
  const NoiseStream noise(g_seed, stream + 1);
  std::vector<double> xi(static_cast<std::size_t>(c.bath_dof()));
  const long per = std::lround(every / in.dt);
  const long blocks = std::lround(t_end / every);
  double sum = 0.0;
  long k = 0;
  for (long blk = 0; blk < blocks; ++blk) {
    for (long i = 0; i < per; ++i, ++k) {
      noise.gaussians(static_cast<std::uint64_t>(k), xi);
      advance(c, in, a, xi);
      advance(c, in, b, xi);
    }
    const auto fa = a.flatten();
    auto fb = b.flatten();
    double d2 = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) d2 += (fb[i] - fa[i]) * (fb[i] - fa[i]);
    const double d = std::sqrt(d2);
    sum += std::log(d / d0);
    const double scale = d0 / d;
    for (std::size_t i = 0; i < b.q.size(); ++i) b.q[i] = a.q[i] + scale * (b.q[i] - a.q[i]);
    for (std::size_t i = 0; i < b.p.size(); ++i) b.p[i] = a.p[i] + scale * (b.p[i] - a.p[i]);
    for (std::size_t i = 0; i < b.s.size(); ++i) b.s[i] = a.s[i] + scale * (b.s[i] - a.s[i]);
  }
  return sum / (static_cast<double>(blocks) * every);
}

Verdict criterion9() {
  const ChainConfig h = harmonic_default();
  const double abscissa = spectral_abscissa(linearize(h).A);
  const SyncResult hr = sync_run(h, 3000.0, 500.0, 3000.0, 90);
  const SyncResult fr = sync_run(ChainConfig{}, 3000.0, 0.0, 3000.0, 95);
  CsvFile csv("c9_sync.csv", {"time", "harmonic_distance", "fpu_distance"});
  for (std::size_t i = 0; i < hr.samples.size() && i < fr.samples.size(); ++i) {
    csv.row({fd(hr.samples[i].time), fd(hr.samples[i].distance), fd(fr.samples[i].distance)});
  }
  const double fpu_final = fr.samples.back().distance;
  bool ok = hr.slope && fr.slope && *hr.slope < 0.0 && *fr.slope < 0.0;
  ok = ok && std::abs(*hr.slope - abscissa) <= 0.1 * std::abs(abscissa);
  ok = ok && fpu_final < 1e-8;
  std::string d = "harmonic log-distance slope " + (hr.slope ? fmt("%.5f", *hr.slope) : std::string("n/a")) +
                  " vs spectral abscissa " + fmt("%.5f", abscissa) + "; FPU slope " +
                  (fr.slope ? fmt("%.4f", *fr.slope) : std::string("n/a")) + ", final distance " +
                  fmt("%.1e", fpu_final);
  const double lyap = top_lyapunov(ChainConfig{}, 4000.0, 10.0, 97);
  d += "; FPU top Lyapunov exponent under common noise " + fmt("%+.4f", lyap) +
       (lyap > 0.0 ? " (positive: synchronous coupling cannot contract)" : "");
  return {ok, d};
}

// Criterion 10 ---------------------------------------------------------------

Verdict criterion10() {
  GLSpec s;
  s.seed = g_seed;
  const GLState a = gl_random_state(s.K, NoiseStream(g_seed, 2001), 0.5, 1.5, 0.05);
  const GLState b = gl_random_state(s.K, NoiseStream(g_seed, 2002), 0.5, 1.5, 0.05);
  const auto sync = gl_synchronization_test(s, a, b, 5000, 50, 10);
  const Estimate ea = gl_low_mode_average(s, a, 5000, 100000, 11);
  const Estimate eb = gl_low_mode_average(s, b, 5000, 100000, 12);
  // Wide initial data: u_0 of either sign and O(1) modes (kink-like profiles).
  const GLState wa = gl_random_state(s.K, NoiseStream(g_seed, 2003), -1.5, 1.5, 1.0);
  const GLState wb = gl_random_state(s.K, NoiseStream(g_seed, 2004), -1.5, 1.5, 1.0);
  const auto wide = gl_synchronization_test(s, wa, wb, 5000, 50, 13);
  CsvFile csv("c10_gl.csv", {"time", "distance", "distance_wide"});
  for (std::size_t i = 0; i < sync.size() && i < wide.size(); ++i) {
    csv.row({fd(sync[i].time), fd(sync[i].distance), fd(wide[i].distance)});
  }
  CsvFile lm("c10_low_mode.csv", {"initial", "mean_u1_sq", "stderr"});
  lm.row({"a", fd(ea.mean), fd(ea.std_error)});
  lm.row({"b", fd(eb.mean), fd(eb.std_error)});
  const double final = sync.back().distance;
  const double se = std::hypot(ea.std_error, eb.std_error);
  const bool ok = final < 1e-6 && std::abs(ea.mean - eb.mean) <= 3.0 * se;
  return {ok, "distance at t=" + fmt("%.0f", sync.back().time) + " " + fmt("%.1e", final) + "; <|u1|^2> " +
                  pm(ea.mean, ea.std_error) + " vs " + pm(eb.mean, eb.std_error) +
                  "; info: wide initial data distance " + fmt("%.2g", wide.back().distance)};
}

// Criterion 11 ---------------------------------------------------------------

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "effective.cfg") continue;  // names the output directory
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

Verdict criterion11() {
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"oracle", "experiment = oracle\nonsite = harmonic\ninteraction = harmonic\nsteps = 2000000\n"},
      {"simulate", "n = 5\nsteps = 1000000\nrecord_every = 1000\n"},
      {"flux", "experiment = flux\nensemble = 16\nsteps = 20000\n"},
      {"gc", "experiment = gc-test\nn = 2\nT_L = 1.2\nlambda_L = 1\nlambda_R = 1\nensemble = 1000\nhorizon = 20\n"
             "gc_burn_in = 10\ndt = 0.002\n"},
      {"converge", "experiment = converge\nsteps = 100000\nrecord_every = 100\n"},
      {"gl", "experiment = gl\ngl_steps = 2500\nrecord_every = 50\n"},
  };
  bool ok = true;
  int files = 0;
  std::string bad;
  for (const auto& [name, text] : configs) {
    std::map<std::string, std::string> runs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = g_out / "determinism" / (name + (k ? "_b" : "_a"));
      fs::remove_all(dir);
      cli::ExperimentConfig cfg = cli::parse_config(text + "seed = " + std::to_string(g_seed) + "\n");
      cfg.output = dir.string();
      cfg.threads = k ? g_threads : 1;
      std::ostringstream log;
      const auto res = cli::run(cfg, log);
      if (res.exit_code != 0) {
        ok = false;
        bad += " " + name + "(exit " + std::to_string(res.exit_code) + ")";
      }
      runs[k] = read_dir(dir);
    }
    if (runs[0] != runs[1] || runs[0].empty()) {
      ok = false;
      bad += " " + name;
    }
    files += static_cast<int>(runs[0].size());
  }
  return {ok, std::to_string(configs.size()) + " experiments run twice (1 thread, then " +
                  (g_threads ? std::to_string(g_threads) : std::string("all")) + " threads), " +
                  std::to_string(files) + " CSVs compared" + (bad.empty() ? "" : "; mismatch:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  app.add_option("--out", out, "Directory for the CSV evidence");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--seed", g_seed, "Master seed");
  app.add_option("--threads", g_threads, "Worker threads for ensembles (0: all cores)");
  std::vector<int> known_red;
  app.add_option("--known-red", known_red,
                 "Criteria whose failure is documented and does not affect the exit status")
      ->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  fs::create_directories(g_out);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle flux agreement", criterion1},        {"zero total flux", criterion2},
      {"hot-to-cold direction", criterion3},        {"temperature bound", criterion4},
      {"equilibrium Gibbs moments", criterion5},    {"pathwise energy balance order", criterion6},
      {"coordinate-form equivalence", criterion7},  {"fluctuation symmetry", criterion8},
      {"exponential attraction", criterion9},       {"SPDE synchronization", criterion10},
      {"determinism", criterion11},
  };
  const std::set<int> wanted(only.begin(), only.end());
  const std::set<int> red(known_red.begin(), known_red.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool excused = !v.pass && red.count(id);
    std::printf("%s %2d %s: %s [%.0fs]%s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                v.detail.c_str(), secs, excused ? " [known red]" : "");
    std::fflush(stdout);
    failed += !v.pass && !excused;
  }
  return failed ? 1 : 0;
}
