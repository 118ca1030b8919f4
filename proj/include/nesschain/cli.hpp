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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nesschain/dynamics.hpp"
#include "nesschain/model.hpp"
#include "nesschain/spde_gl.hpp"

namespace nesschain::cli {

enum class Experiment { simulate, flux, gc_test, oracle, converge, gl };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& text);

struct ExperimentConfig {
  Experiment experiment = Experiment::simulate;
  ChainConfig chain;
  IntegratorSpec integrator;
  long steps = 1000000;
  double burn_in = 0.1;  // fraction of steps discarded before averaging
  int batches = kDefaultBatches;
  int ensemble = 4000;     // trajectories for flux and gc-test
  double horizon = 400.0;  // gc-test horizon t (2t is also recorded)
  double gc_burn_in = 200.0;
  std::uint64_t seed = 1;
  long record_every = 1000;
  int threads = 0;
  std::string output = ".";
  GLSpec gl;
  long gl_steps = 5000;
  double gl_init_amplitude = 0.05;  // mode k starts with amplitude gl_init_amplitude / k
  double gl_u0_min = 0.5;           // initial mean mode u_0 drawn from [gl_u0_min, gl_u0_max]
  double gl_u0_max = 1.5;

  bool operator==(const ExperimentConfig&) const = default;
};

/// A config problem tied to a line of the input (0 when not attributable).
struct ConfigIssue {
  int line;
  std::string message;
};

class ConfigParseError : public std::invalid_argument {
 public:
  explicit ConfigParseError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses `key = value` lines (`#` starts a comment). Unknown keys, repeated
/// keys, malformed values and invariant violations are all collected and
/// thrown together as ConfigParseError.
ExperimentConfig parse_config(const std::string& text);

/// Every key with its effective value, in a fixed order; parse_config of the
/// result reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 config error, 2 blow-up
  std::vector<std::filesystem::path> files;
  std::string message;
};

/// Runs the experiment and writes its CSV files into config.output. The
/// effective configuration is echoed to `log` and to effective.cfg.
RunResult run(const ExperimentConfig& config, std::ostream& log);

}  // namespace nesschain::cli
