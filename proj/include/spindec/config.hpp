/* Copyright 2026 The Spindec Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SPINDEC_CONFIG_HPP
#define SPINDEC_CONFIG_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "spindec/analysis.hpp"
#include "spindec/spinsys.hpp"

namespace spindec {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AcquisitionConfig {
  double dwell_s = 100e-6;
  int samples = 4096;
  double line_broadening_hz = 1.0;
  std::set<int> detect;  // defaults to the system spins
  bool halve_first_point = true;
  /// When unset, each command applies its own default: the scan fits the
  /// signed real-part spectrum, the spectrum command displays magnitudes.
  std::optional<SpectrumMode> mode;
};

struct ScanConfig {
  double t_start_s = 0.0;
  double t_stop_s = 0.020;
  int points = 81;
  std::optional<std::pair<double, double>> window_hz;
  std::optional<std::string> reference_fit_path;  // resolved to absolute
};

/// Parsed experiment configuration. ppm offsets are converted to Hz at load
/// time; the analysis layer works purely in Hz.
struct ExperimentConfig {
  SpinSystem sys;
  AcquisitionConfig acq;
  ScanConfig scan;
  std::optional<double> reference_mhz;  // Hz-per-ppm conversion factor
  std::optional<double> carrier_ppm;    // ppm position of zero frequency
  // [paths] defaults; command-line flags take precedence
  std::optional<std::string> script_path;  // resolved relative to the config
  std::optional<std::string> output_dir;
};

/// Load and validate a config file. Throws ConfigError with a line-numbered
/// message on any problem.
ExperimentConfig load_config(const std::string& path);

/// Parse config text (for tests); `origin` names the source in errors and
/// anchors relative paths.
ExperimentConfig parse_config(const std::string& text,
                              const std::string& origin);

}  // namespace spindec

#endif  // SPINDEC_CONFIG_HPP
