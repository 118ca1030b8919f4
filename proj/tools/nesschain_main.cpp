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

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "nesschain/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyse heat-conducting oscillator chains"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool check_only = false;
  app.add_option("config", config_path, "Config file (key = value lines); omit for defaults, '-' for stdin");
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--out", out_dir, "Output directory (overrides the 'output' key)");
  app.add_flag("--check", check_only, "Validate and echo the effective config, then exit");
  CLI11_PARSE(app, argc, argv);

  std::string text;
  if (config_path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read " << config_path << '\n';
      return 1;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  nesschain::cli::ExperimentConfig cfg;
  try {
    cfg = nesschain::cli::parse_config(text);
  } catch (const nesschain::cli::ConfigParseError& e) {
    std::cerr << "config error:\n" << e.what() << '\n';
    return 1;
  }
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.output = *out_dir;
  if (check_only) {
    std::cout << nesschain::cli::serialize_config(cfg);
    return 0;
  }
  const auto result = nesschain::cli::run(cfg, std::cout);
  if (result.exit_code != 0) std::cerr << result.message << '\n';
  return result.exit_code;
}
