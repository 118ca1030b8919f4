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

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nesschain {

/// Input arrays whose lengths do not match the chain geometry.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One or more violated model invariants. Every violation is kept so that a
/// caller can report all of them at once.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}
  explicit ConfigError(const std::string& violation)
      : ConfigError(std::vector<std::string>{violation}) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

/// A trajectory left the numerically trustworthy region (non-finite values or
/// energy above the blow-up threshold). Carries a flattened copy of the
/// offending state for diagnostics.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, long step, std::vector<double> diagnostic)
      : std::runtime_error(what), step_(step), diagnostic_(std::move(diagnostic)) {}

  long step() const noexcept { return step_; }
  const std::vector<double>& diagnostic_state() const noexcept { return diagnostic_; }

 private:
  long step_;
  std::vector<double> diagnostic_;
};

/// A linear system without a stationary state (drift matrix not Hurwitz).
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Estimation requested on too little data.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nesschain
