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

#include "nesschain/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "nesschain/errors.hpp"
#include "nesschain/fluctuation.hpp"
#include "nesschain/harmonic_oracle.hpp"

namespace nesschain::cli {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::simulate: return "simulate";
    case Experiment::flux: return "flux";
    case Experiment::gc_test: return "gc-test";
    case Experiment::oracle: return "oracle";
    case Experiment::converge: return "converge";
    case Experiment::gl: return "gl";
  }
  return "simulate";
}

Experiment parse_experiment(const std::string& text) {
  for (Experiment e : {Experiment::simulate, Experiment::flux, Experiment::gc_test, Experiment::oracle,
                       Experiment::converge, Experiment::gl}) {
    if (text == to_string(e)) return e;
  }
  throw std::invalid_argument("unknown experiment '" + text +
                              "' (expected simulate, flux, gc-test, oracle, converge or gl)");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace {

std::string render_issues(const std::vector<ConfigIssue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += '\n';
    out += i.line > 0 ? "line " + std::to_string(i.line) + ": " + i.message : i.message;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& text) {
  T v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw std::invalid_argument("'" + text + "' is not a valid " +
                                (std::is_floating_point_v<T> ? std::string("number") : std::string("integer")));
  }
  return v;
}

PolynomialPotential parse_potential(const std::string& text) {
  if (text == "harmonic") return PolynomialPotential::harmonic();
  if (text == "fpu") return PolynomialPotential::fpu();
  return PolynomialPotential::parse(text);
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Key number_key(std::string name, T ExperimentConfig::*member) {
  return {std::move(name), [member](ExperimentConfig& c, const std::string& v) { c.*member = parse_number<T>(v); },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

template <class T, class Getter>
Key nested_key(std::string name, Getter field) {
  return {std::move(name), [field](ExperimentConfig& c, const std::string& v) { field(c) = parse_number<T>(v); },
          [field](const ExperimentConfig& c) {
            const T v = field(const_cast<ExperimentConfig&>(c));
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(v);
            } else {
              return std::to_string(v);
            }
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"experiment", [](ExperimentConfig& c, const std::string& v) { c.experiment = parse_experiment(v); },
                 [](const ExperimentConfig& c) { return to_string(c.experiment); }});
    k.push_back(nested_key<int>("n", [](ExperimentConfig& c) -> int& { return c.chain.n; }));
    k.push_back(nested_key<int>("d", [](ExperimentConfig& c) -> int& { return c.chain.d; }));
    k.push_back({"onsite", [](ExperimentConfig& c, const std::string& v) { c.chain.onsite = parse_potential(v); },
                 [](const ExperimentConfig& c) { return c.chain.onsite.to_string(); }});
    k.push_back({"interaction",
                 [](ExperimentConfig& c, const std::string& v) { c.chain.interaction = parse_potential(v); },
                 [](const ExperimentConfig& c) { return c.chain.interaction.to_string(); }});
    k.push_back(nested_key<double>("lambda_L", [](ExperimentConfig& c) -> double& { return c.chain.left.lambda; }));
    k.push_back(nested_key<double>("lambda_R", [](ExperimentConfig& c) -> double& { return c.chain.right.lambda; }));
    k.push_back(nested_key<double>("gamma_L", [](ExperimentConfig& c) -> double& { return c.chain.left.gamma; }));
    k.push_back(nested_key<double>("gamma_R", [](ExperimentConfig& c) -> double& { return c.chain.right.gamma; }));
    k.push_back(nested_key<double>("T_L", [](ExperimentConfig& c) -> double& { return c.chain.left.temperature; }));
    k.push_back(nested_key<double>("T_R", [](ExperimentConfig& c) -> double& { return c.chain.right.temperature; }));
    k.push_back({"scheme",
                 [](ExperimentConfig& c, const std::string& v) { c.integrator.scheme = parse_scheme(v); },
                 [](const ExperimentConfig& c) { return to_string(c.integrator.scheme); }});
    k.push_back(nested_key<double>("dt", [](ExperimentConfig& c) -> double& { return c.integrator.dt; }));
    k.push_back(nested_key<double>("blow_up",
                                   [](ExperimentConfig& c) -> double& { return c.integrator.blow_up_threshold; }));
    k.push_back(number_key("steps", &ExperimentConfig::steps));
    k.push_back(number_key("burn_in", &ExperimentConfig::burn_in));
    k.push_back(number_key("batches", &ExperimentConfig::batches));
    k.push_back(number_key("ensemble", &ExperimentConfig::ensemble));
    k.push_back(number_key("horizon", &ExperimentConfig::horizon));
    k.push_back(number_key("gc_burn_in", &ExperimentConfig::gc_burn_in));
    k.push_back(number_key("seed", &ExperimentConfig::seed));
    k.push_back(number_key("record_every", &ExperimentConfig::record_every));
    k.push_back(number_key("threads", &ExperimentConfig::threads));
    k.push_back({"output", [](ExperimentConfig& c, const std::string& v) { c.output = v; },
                 [](const ExperimentConfig& c) { return c.output; }});
    k.push_back(nested_key<double>("gl_L", [](ExperimentConfig& c) -> double& { return c.gl.L; }));
    k.push_back(nested_key<int>("gl_K", [](ExperimentConfig& c) -> int& { return c.gl.K; }));
    k.push_back(nested_key<int>("gl_k_star", [](ExperimentConfig& c) -> int& { return c.gl.k_star; }));
    k.push_back(nested_key<double>("gl_noise_scale", [](ExperimentConfig& c) -> double& { return c.gl.noise_scale; }));
    k.push_back(nested_key<double>("gl_dt", [](ExperimentConfig& c) -> double& { return c.gl.dt; }));
    k.push_back(
        nested_key<double>("gl_blow_up", [](ExperimentConfig& c) -> double& { return c.gl.blow_up_threshold; }));
    k.push_back(number_key("gl_steps", &ExperimentConfig::gl_steps));
    k.push_back(number_key("gl_init_amplitude", &ExperimentConfig::gl_init_amplitude));
    k.push_back(number_key("gl_u0_min", &ExperimentConfig::gl_u0_min));
    k.push_back(number_key("gl_u0_max", &ExperimentConfig::gl_u0_max));
    return k;
  }();
  return table;
}

// Which key a model-level violation message refers to.
std::string key_for_message(const std::string& msg) {
  static const std::vector<std::pair<std::string, std::string>> prefixes = {
      {"n = ", "n"},
      {"d = ", "d"},
      {"onsite", "onsite"},
      {"interaction degree", "interaction"},
      {"interaction", "interaction"},
      {"left.lambda", "lambda_L"},
      {"left.gamma", "gamma_L"},
      {"left.temperature", "T_L"},
      {"right.lambda", "lambda_R"},
      {"right.gamma", "gamma_R"},
      {"right.temperature", "T_R"},
  };
  for (const auto& [p, k] : prefixes) {
    if (msg.rfind(p, 0) == 0) return k;
  }
  return {};
}

std::vector<ConfigIssue> check_invariants(const ExperimentConfig& c, const std::map<std::string, int>& lines) {
  std::vector<ConfigIssue> out;
  auto line_of = [&lines](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  auto require = [&](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) out.push_back({line_of(key), key + ": " + msg});
  };
  for (const auto& e : check_config(c.chain).errors) out.push_back({line_of(key_for_message(e)), e});
  require(c.integrator.dt > 0.0 && std::isfinite(c.integrator.dt), "dt", "must be finite and > 0");
  require(c.integrator.blow_up_threshold > 0.0, "blow_up", "must be > 0");
  require(c.steps >= 0, "steps", "must be >= 0");
  require(c.burn_in >= 0.0 && c.burn_in < 1.0, "burn_in", "fraction must lie in [0, 1)");
  require(c.batches >= kMinBatches, "batches", "must be >= " + std::to_string(kMinBatches));
  require(c.ensemble >= 1, "ensemble", "must be >= 1");
  require(c.horizon > 0.0, "horizon", "must be > 0");
  require(c.gc_burn_in >= 0.0, "gc_burn_in", "must be >= 0");
  require(c.record_every >= 1, "record_every", "must be >= 1");
  require(c.threads >= 0, "threads", "must be >= 0 (0 = all cores)");
  require(!c.output.empty(), "output", "must not be empty");
  require(c.gl_steps >= 0, "gl_steps", "must be >= 0");
  require(c.gl_init_amplitude >= 0.0, "gl_init_amplitude", "must be >= 0");
  require(c.gl_u0_min <= c.gl_u0_max, "gl_u0_min", "must not exceed gl_u0_max");
  try {
    validate_gl(c.gl);
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) {
      std::string key = "gl_dt";
      if (v.rfind("L ", 0) == 0) key = "gl_L";
      if (v.rfind("K ", 0) == 0) key = "gl_K";
      if (v.rfind("k_star", 0) == 0) key = "gl_k_star";
      if (v.rfind("noise_scale", 0) == 0) key = "gl_noise_scale";
      if (v.rfind("blow_up", 0) == 0) key = "gl_blow_up";
      out.push_back({line_of(key), key + ": " + v});
    }
  }
  if (c.experiment == Experiment::gc_test) {
    require(c.ensemble >= 1000, "ensemble", "gc-test needs at least 1000 trajectories");
  }
  if (c.experiment == Experiment::oracle) {
    const bool equal_t = c.chain.left.temperature == c.chain.right.temperature;
    require(c.chain.is_harmonic() || (c.chain.n == 1 && equal_t), "experiment",
            "oracle needs a harmonic chain, or n = 1 with T_L = T_R");
  }
  return out;
}

}  // namespace

ConfigParseError::ConfigParseError(std::vector<ConfigIssue> issues)
    : std::invalid_argument(render_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line_no, "expected 'key = value', got '" + line + "'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&key](const Key& k) { return k.name == key; });
    if (it == table.end()) {
      issues.push_back({line_no, "unknown key '" + key + "'"});
      continue;
    }
    if (const auto prev = seen.find(key); prev != seen.end()) {
      issues.push_back({line_no, "key '" + key + "' already set on line " + std::to_string(prev->second)});
      continue;
    }
    seen[key] = line_no;
    try {
      it->set(cfg, value);
    } catch (const std::exception& e) {
      issues.push_back({line_no, key + ": " + e.what()});
    }
  }
  if (issues.empty()) issues = check_invariants(cfg, seen);
  if (!issues.empty()) throw ConfigParseError(std::move(issues));
  return cfg;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header, RunResult& result)
      : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    result.files.push_back(path);
    write_row(header);
  }
  void row(std::initializer_list<std::string> cells) { write_row(std::vector<std::string>(cells)); }
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  void incomplete() { out_ << "# INCOMPLETE\n" << std::flush; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string fd(double x) { return format_double(x); }

struct Context {
  const ExperimentConfig& cfg;
  std::ostream& log;
  RunResult& result;
  std::vector<std::unique_ptr<Csv>> files;

  Csv& open(const std::string& name, const std::vector<std::string>& header) {
    files.push_back(std::make_unique<Csv>(std::filesystem::path(cfg.output) / name, header, result));
    return *files.back();
  }
};

/// Streams (step, time, fluxes, W) every `every` steps and at the end.
class FluxCsvObserver : public Observer {
 public:
  FluxCsvObserver(Csv& csv, long every) : csv_(csv), every_(every) {}
  void begin(const ChainConfig& config, long, double dt) override {
    config_ = &config;
    dt_ = dt;
  }
  void observe(long step, double time, const ChainState&, const FluxSample& f) override {
    if (step % every_ == 0) csv_.row({std::to_string(step), fd(time), fd(f.phi_left), fd(f.phi_right), fd(f.sigma), fd(w_)});
    w_ += dt_ * f.sigma;
  }
  void end(long steps_done, double time, const ChainState& state) override {
    if (steps_done == 0 || steps_done % every_ == 0) return;
    const FluxSample f = flux(*config_, state);
    csv_.row({std::to_string(steps_done), fd(time), fd(f.phi_left), fd(f.phi_right), fd(f.sigma), fd(w_)});
  }

 private:
  Csv& csv_;
  long every_;
  const ChainConfig* config_ = nullptr;
  double dt_ = 0.0;
  double w_ = 0.0;
};

/// Batch means of |q_1|^2 and |q_1|^4.
class MomentObserver : public Observer {
 public:
  MomentObserver(long burn_in, int batches) : burn_in_(burn_in), batches_(batches) {}
  void begin(const ChainConfig& config, long n_steps, double) override {
    d_ = config.d;
    q2_ = BatchAccumulator(std::max(0L, n_steps - burn_in_), batches_);
    q4_ = q2_;
  }
  void observe(long step, double, const ChainState& st, const FluxSample&) override {
    if (step < burn_in_) return;
    double r2 = 0.0;
    for (int c = 0; c < d_; ++c) r2 += st.q[static_cast<std::size_t>(c)] * st.q[static_cast<std::size_t>(c)];
    q2_.push(r2);
    q4_.push(r2 * r2);
  }
  Estimate q2() const { return q2_.series().estimate(); }
  Estimate q4() const { return q4_.series().estimate(); }

 private:
  long burn_in_;
  int batches_;
  int d_ = 1;
  BatchAccumulator q2_, q4_;
};

long burn_in_steps(const ExperimentConfig& c) { return std::lround(c.burn_in * static_cast<double>(c.steps)); }

void write_profile(Context& ctx, const TrajectoryStats& stats) {
  Csv& csv = ctx.open("profile.csv", {"site", "T_j", "stderr"});
  try {
    const auto prof = kinetic_temperature_profile(stats);
    for (std::size_t j = 0; j < prof.size(); ++j) csv.row({std::to_string(j + 1), fd(prof[j].mean), fd(prof[j].std_error)});
  } catch (const InsufficientDataError& e) {
    ctx.log << "note: profile.csv left empty (" << e.what() << ")\n";
  }
}

void run_simulate(Context& ctx) {
  const auto& c = ctx.cfg;
  Csv& fcsv = ctx.open("flux.csv", {"step", "time", "phi_L", "phi_R", "sigma", "W"});
  FluxCsvObserver fobs(fcsv, c.record_every);
  Observer* obs[] = {&fobs};
  ChainState st = ChainState::zero(c.chain);
  const RunLength len{c.steps, burn_in_steps(c), c.batches, 64};
  const TrajectoryStats stats = simulate(c.chain, c.integrator, st, len, NoiseStream(c.seed, 0), obs);
  write_profile(ctx, stats);
  Csv& sum = ctx.open("summary.csv", {"quantity", "mean", "stderr"});
  auto put = [&sum](const char* name, const BatchSeries& b) {
    if (b.batches().empty()) return;
    const Estimate e = b.estimate();
    sum.row({name, fd(e.mean), fd(e.std_error)});
  };
  put("phi_L", stats.phi_left);
  put("phi_R", stats.phi_right);
  put("phi_total", stats.phi_total);
  put("sigma", stats.sigma);
}

Estimate mean_and_se(const std::vector<double>& x) {
  Estimate e;
  if (x.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  for (double v : x) e.mean += v;
  e.mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - e.mean) * (v - e.mean);
  e.std_error = x.size() > 1 ? std::sqrt(acc / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()))
                             : std::numeric_limits<double>::quiet_NaN();
  return e;
}

void run_flux(Context& ctx) {
  const auto& c = ctx.cfg;
  EnsembleSpec es;
  es.trajectories = c.ensemble;
  es.seed = c.seed;
  es.burn_in_steps = burn_in_steps(c);
  es.steps = c.steps - es.burn_in_steps;
  es.integrator = c.integrator;
  es.threads = c.threads;
  const EnsembleResult r = run_ensemble(c.chain, es);
  ctx.log << "kernel: " << r.kernel << '\n';
  Csv& tr = ctx.open("trajectories.csv", {"trajectory", "phi_L", "phi_R", "sigma"});
  for (std::size_t i = 0; i < r.sigma.size(); ++i) {
    tr.row({std::to_string(i), fd(r.phi_left[i]), fd(r.phi_right[i]), fd(r.sigma[i])});
  }
  Csv& prof = ctx.open("profile.csv", {"site", "T_j", "stderr"});
  for (std::size_t j = 0; j < r.kinetic.size(); ++j) {
    const Estimate e = mean_and_se(r.kinetic[j]);
    prof.row({std::to_string(j + 1), fd(e.mean), fd(e.std_error)});
  }
  Csv& sum = ctx.open("summary.csv", {"quantity", "mean", "stderr"});
  std::vector<double> total(r.sigma.size());
  for (std::size_t i = 0; i < total.size(); ++i) total[i] = r.phi_left[i] + r.phi_right[i];
  for (auto [name, v] : {std::pair{"phi_L", &r.phi_left}, {"phi_R", &r.phi_right}, {"phi_total", &total},
                         {"sigma", &r.sigma}}) {
    const Estimate e = mean_and_se(*v);
    sum.row({name, fd(e.mean), fd(e.std_error)});
  }
}

void write_cgf_rows(Csv& csv, const std::string& functional, double horizon, const std::vector<double>& eta,
                    const std::vector<double>& e, const std::vector<double>& lo, const std::vector<double>& hi) {
  for (std::size_t j = 0; j < eta.size(); ++j) {
    csv.row({functional, horizon > 0 ? fd(horizon) : "extrapolated", fd(eta[j]), fd(e[j]), fd(lo[j]), fd(hi[j])});
  }
}

void run_gc(Context& ctx) {
  const auto& c = ctx.cfg;
  GCTestSpec spec;
  spec.trajectories = c.ensemble;
  spec.horizon = c.horizon;
  spec.burn_in = c.gc_burn_in;
  spec.integrator = c.integrator;
  spec.seed = c.seed;
  spec.threads = c.threads;
  spec.cgf.seed = c.seed;
  const GCReport rep = gc_symmetry_test(c.chain, spec);
  const auto& cor = rep.corrected;
  Csv& gc = ctx.open("gc.csv", {"eta", "e_eta", "ci_lo", "ci_hi"});
  for (std::size_t j = 0; j < cor.cgf_t.eta_grid.size(); ++j) {
    gc.row({fd(cor.cgf_t.eta_grid[j]), fd(cor.cgf_t.e_values[j]), fd(cor.cgf_t.ci_lo[j]), fd(cor.cgf_t.ci_hi[j])});
  }
  Csv& det = ctx.open("gc_detail.csv", {"functional", "horizon", "eta", "e_eta", "ci_lo", "ci_hi"});
  for (const FunctionalAnalysis* fa : {&rep.corrected, &rep.raw}) {
    write_cgf_rows(det, fa->name, c.horizon, fa->cgf_t.eta_grid, fa->cgf_t.e_values, fa->cgf_t.ci_lo, fa->cgf_t.ci_hi);
    write_cgf_rows(det, fa->name, 2 * c.horizon, fa->cgf_2t.eta_grid, fa->cgf_2t.e_values, fa->cgf_2t.ci_lo,
                   fa->cgf_2t.ci_hi);
    write_cgf_rows(det, fa->name, -1, fa->cgf_t.eta_grid, fa->e_extrapolated, fa->extrapolated_ci_lo,
                   fa->extrapolated_ci_hi);
  }
  Csv& rt = ctx.open("ratetest.csv", {"u", "log_ratio", "stderr"});
  for (const auto& b : cor.ratio_t.bins) rt.row({fd(b.u), fd(b.log_ratio), fd(b.std_error)});
  std::vector<double> y_grid;
  for (int i = -20; i <= 20; ++i) y_grid.push_back(i / 10.0);
  const RateFunctionEstimate rf = legendre_transform(cor.cgf_t, y_grid);
  Csv& rate = ctx.open("rate.csv", {"y", "e_hat"});
  for (std::size_t i = 0; i < rf.y_grid.size(); ++i) rate.row({fd(rf.y_grid[i]), fd(rf.e_hat[i])});
  Csv& sum = ctx.open("gc_summary.csv", {"quantity", "value", "stderr"});
  for (const FunctionalAnalysis* fa : {&rep.corrected, &rep.raw}) {
    sum.row({fa->name + ".mean_rate", fd(fa->mean_rate), fd(fa->mean_rate_se)});
    for (auto [tag, r] : {std::pair{".slope_t", &fa->ratio_t}, {".slope_2t", &fa->ratio_2t}}) {
      if (r->available) {
        sum.row({fa->name + tag, fd(r->slope), fd(r->slope_se)});
      } else {
        ctx.log << fa->name << tag << ": " << r->message << '\n';
      }
    }
    for (const auto& p : fa->pairs_t) {
      sum.row({fa->name + ".pair_diff_t(" + fd(p.eta) + ")", fd(p.difference), fd(p.combined_ci)});
    }
    for (const auto& p : fa->pairs_extrapolated) {
      sum.row({fa->name + ".pair_diff_extrapolated(" + fd(p.eta) + ")", fd(p.difference), fd(p.combined_ci)});
    }
  }
  sum.row({"predicted_slope", fd(rep.predicted_slope), "0"});
  if (rep.has_control) {
    sum.row({"control.mean_rate", fd(rep.control_mean_rate), fd(rep.control_mean_rate_se)});
    if (rep.control_ratio.available) {
      sum.row({"control.slope_t", fd(rep.control_ratio.slope), fd(rep.control_ratio.slope_se)});
    } else {
      ctx.log << "control: " << rep.control_ratio.message << '\n';
    }
  }
  for (const auto& w : cor.cgf_t.warnings) ctx.log << "warning: " << w << '\n';
  ctx.log << "GC corrected slope at t: " << cor.ratio_t.slope << " +- " << cor.ratio_t.slope_se << " (predicted 1)\n";
}

void run_oracle(Context& ctx) {
  const auto& c = ctx.cfg;
  Csv& csv = ctx.open("oracle.csv", {"quantity", "exact", "simulated", "stderr"});
  const long burn = burn_in_steps(c);
  MomentObserver mom(burn, c.batches);
  Observer* obs[] = {&mom};
  ChainState st = ChainState::zero(c.chain);
  const TrajectoryStats stats =
      simulate(c.chain, c.integrator, st, RunLength{c.steps, burn, c.batches, 64}, NoiseStream(c.seed, 0), obs);
  if (stats.phi_left.batches().size() < static_cast<std::size_t>(kMinBatches)) {
    throw InsufficientDataError("oracle experiment needs at least " + std::to_string(2 * c.batches) +
                                " post burn-in steps");
  }
  auto row = [&csv](const std::string& name, double exact, const Estimate& e) {
    csv.row({name, fd(exact), fd(e.mean), fd(e.std_error)});
  };
  if (c.chain.is_harmonic()) {
    const LinearSystem sys = linearize(c.chain);
    const StationaryCovariance cov = solve_lyapunov(sys);
    const MeanFlux mf = mean_flux(c.chain, sys, cov);
    row("phi_L", mf.phi_left, stats.phi_left.estimate());
    row("phi_R", mf.phi_right, stats.phi_right.estimate());
    row("sigma", mf.sigma, stats.sigma.estimate());
    const auto temps = exact_temperatures(sys, cov);
    const auto prof = kinetic_temperature_profile(stats);
    for (std::size_t j = 0; j < temps.size(); ++j) row("T_" + std::to_string(j + 1), temps[j], prof[j]);
  }
  if (c.chain.n == 1 && c.chain.left.temperature == c.chain.right.temperature) {
    const GibbsMoments g = gibbs_quadrature_1site(c.chain, c.chain.left.temperature);
    row("q2", g.q2, mom.q2());
    row("q4", g.q4, mom.q4());
    const Estimate k = kinetic_temperature_profile(stats)[0];
    row("p2", g.p2, {k.mean * c.chain.d, k.std_error * c.chain.d});
    if (!c.chain.is_harmonic()) row("sigma", 0.0, stats.sigma.estimate());
  }
}

ChainState random_chain_state(const ChainConfig& chain, const NoiseStream& src) {
  ChainState st = ChainState::zero(chain);
  std::vector<double> u(static_cast<std::size_t>(2 * chain.dof() + chain.bath_dof()));
  src.uniforms(0, u);
  std::size_t i = 0;
  for (double& x : st.q) x = 2.0 * u[i++] - 1.0;
  for (double& x : st.p) x = 2.0 * u[i++] - 1.0;
  for (double& x : st.s) x = 2.0 * u[i++] - 1.0;
  return st;
}

void run_converge(Context& ctx) {
  const auto& c = ctx.cfg;
  const ChainState a = random_chain_state(c.chain, NoiseStream(c.seed, 1001));
  const ChainState b = random_chain_state(c.chain, NoiseStream(c.seed, 1002));
  Csv& csv = ctx.open("converge.csv", {"time", "log_distance"});
  const auto samples = synchronous_pair(c.chain, c.integrator, a, b, c.steps, NoiseStream(c.seed, 0), c.record_every);
  for (const auto& s : samples) csv.row({fd(s.time), fd(s.log_distance)});
  Csv& sum = ctx.open("converge_summary.csv", {"quantity", "value"});
  const double t_end = static_cast<double>(c.steps) * c.integrator.dt;
  const auto rate = fit_log_slope(samples, 0.1 * t_end, t_end, 1e-12);
  sum.row({"fitted_log_slope", rate ? fd(*rate) : "nan"});
  if (c.chain.is_harmonic()) sum.row({"spectral_abscissa", fd(spectral_abscissa(linearize(c.chain).A))});
}

void run_gl(Context& ctx) {
  const auto& c = ctx.cfg;
  GLSpec spec = c.gl;
  spec.seed = c.seed;
  const GLState a = gl_random_state(spec.K, NoiseStream(c.seed, 2001), c.gl_u0_min, c.gl_u0_max, c.gl_init_amplitude);
  const GLState b = gl_random_state(spec.K, NoiseStream(c.seed, 2002), c.gl_u0_min, c.gl_u0_max, c.gl_init_amplitude);
  Csv& csv = ctx.open("gl.csv", {"time", "distance", "low_mode_energy"});
  const auto samples = gl_synchronization_test(spec, a, b, c.gl_steps, c.record_every, 0);
  for (const auto& s : samples) csv.row({fd(s.time), fd(s.distance), fd(s.low_mode_energy)});
}

}  // namespace

RunResult run(const ExperimentConfig& config, std::ostream& log) {
  RunResult result;
  Context ctx{config, log, result, {}};
  const std::string effective = serialize_config(config);
  log << "# effective configuration\n" << effective;
  try {
    std::filesystem::create_directories(config.output);
    {
      std::ofstream cfg(std::filesystem::path(config.output) / "effective.cfg");
      cfg << effective;
      result.files.push_back(std::filesystem::path(config.output) / "effective.cfg");
    }
    switch (config.experiment) {
      case Experiment::simulate: run_simulate(ctx); break;
      case Experiment::flux: run_flux(ctx); break;
      case Experiment::gc_test: run_gc(ctx); break;
      case Experiment::oracle: run_oracle(ctx); break;
      case Experiment::converge: run_converge(ctx); break;
      case Experiment::gl: run_gl(ctx); break;
    }
  } catch (const BlowUpError& e) {
    for (auto& f : ctx.files) f->incomplete();
    result.exit_code = 2;
    result.message = std::string("blow-up at step ") + std::to_string(e.step()) + ": " + e.what();
  } catch (const ConfigError& e) {
    result.exit_code = 1;
    result.message = e.what();
  } catch (const StabilityError& e) {
    result.exit_code = 1;
    result.message = e.what();
  } catch (const InsufficientDataError& e) {
    for (auto& f : ctx.files) f->incomplete();
    result.exit_code = 1;
    result.message = e.what();
  }
  if (!result.message.empty()) log << "error: " << result.message << '\n';
  return result;
}

}  // namespace nesschain::cli
