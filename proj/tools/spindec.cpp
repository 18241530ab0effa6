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

// spindec -- exact density-matrix simulator for small coupled spin systems.
//
//   spindec state    --config tce.cfg [--script prep.seq] [--out DIR]
//   spindec scan     --config tce.cfg [--out DIR] [--jobs N]
//                    [--mode real|magnitude] [--window LO_HZ:HI_HZ]
//   spindec spectrum --config tce.cfg --t SECONDS [--out DIR] [--mode ...]
//   spindec verify   --config tce.cfg
//
// Exit codes: 0 success, 1 config error, 2 script parse error, 3 runtime
// failure, 4 verification failure. Every error prints one line starting
// with "error[code]:".

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "spindec/config.hpp"
#include "spindec/pipeline.hpp"

namespace {

using namespace spindec;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitParse = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerify = 4;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::optional<SpectrumMode> parse_mode(const std::string& mode) {
  if (mode.empty()) return std::nullopt;
  if (mode == "magnitude") return SpectrumMode::Magnitude;
  if (mode == "real") return SpectrumMode::Real;
  throw ConfigError("--mode must be 'magnitude' or 'real'");
}

std::optional<std::pair<double, double>> parse_window(
    const std::string& window) {
  if (window.empty()) return std::nullopt;
  const size_t colon = window.find(':');
  if (colon == std::string::npos)
    throw ConfigError("--window must look like LO_HZ:HI_HZ");
  try {
    const double lo = std::stod(window.substr(0, colon));
    const double hi = std::stod(window.substr(colon + 1));
    if (!(lo < hi)) throw ConfigError("--window bounds out of order");
    return std::make_pair(lo, hi);
  } catch (const std::invalid_argument&) {
    throw ConfigError("--window bounds are not numbers");
  }
}

std::ofstream open_output(const std::string& out_dir,
                          const std::string& name) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path path = std::filesystem::path(out_dir) / name;
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot write output file '" + path.string() +
                             "'");
  return os;
}

/// Script sources: a file path, or builtin:prep / builtin:entangle.
Sequence load_script(const std::string& spec, const SpinSystem& sys) {
  if (spec.rfind("builtin:", 0) == 0) {
    const std::string name = spec.substr(8);
    if (name != "prep" && name != "entangle")
      throw ConfigError("unknown builtin script '" + name +
                        "' (expected prep or entangle)");
    return compile_builtin(name, sys);
  }
  std::ifstream in(spec);
  if (!in) throw ConfigError("cannot open script file '" + spec + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), sys);
}

int cmd_state(const ExperimentConfig& cfg, const std::string& script_path,
              const std::string& out_dir) {
  Sequence script;  // empty script echoes the equilibrium state
  if (!script_path.empty()) script = load_script(script_path, cfg.sys);
  const StateReport report = run_state(cfg, script);
  std::cout << report.text;
  auto os = open_output(out_dir, "state.txt");
  os << report.text;
  return kExitOk;
}

int cmd_scan(const ExperimentConfig& cfg, const ScanOptions& opts,
             const std::string& out_dir) {
  const ScanResult result = run_scan(cfg, opts);

  {
    auto os = open_output(out_dir, "curve.csv");
    write_curve_csv(os, result.curve);
  }
  {
    auto os = open_output(out_dir, "envelope.csv");
    os << "t_seconds,envelope\n";
    for (size_t i = 0; i < result.curve.t.size(); ++i)
      os << fmt17(result.curve.t[i]) << "," << fmt17(result.envelope[i])
         << "\n";
  }

  nlohmann::json report;
  report["points"] = result.curve.t.size();
  report["window_hz"] = {result.window_lo, result.window_hi};
  report["phase_correction_rad"] = result.phase_correction;
  if (result.fit) {
    report["fit"] = {{"amplitude", result.fit->amplitude},
                     {"period_seconds", result.fit->period},
                     {"rms_residual", result.fit->rms_residual}};
    std::cout << "fit: amplitude = " << result.fit->amplitude
              << ", period = " << result.fit->period * 1e3
              << " ms, rms residual = " << result.fit->rms_residual << "\n";
  } else {
    report["fit_warning"] = result.fit_warning;
    std::cout << "warning: " << result.fit_warning << "\n";
  }

  if (cfg.scan.reference_fit_path && result.fit) {
    const ReferenceFit ref = load_reference_fit(*cfg.scan.reference_fit_path);
    const double discrepancy =
        (result.fit->period - ref.period_s) / result.fit->period;
    report["reference_experiment"] = {
        {"amplitude", ref.amplitude},
        {"period_seconds", ref.period_s},
        {"discrepancy", discrepancy},
        {"note",
         "externally measured fit; its deviation from the simulated period "
         "(pulse imperfections, uncontrolled decoherence) is not "
         "reproducible by this simulator"}};
    std::printf(
        "reference experiment (informational, not reproducible here): "
        "period = %.3g ms vs simulated %.4g ms, discrepancy %.1f%%\n",
        ref.period_s * 1e3, result.fit->period * 1e3, 100.0 * discrepancy);
  }

  {
    auto os = open_output(out_dir, "fit.json");
    os << report.dump(2) << "\n";
  }
  std::cout << "wrote curve.csv, envelope.csv, fit.json to " << out_dir
            << "\n";
  return kExitOk;
}

int cmd_spectrum(const ExperimentConfig& cfg, double t,
                 std::optional<SpectrumMode> mode,
                 const std::string& out_dir) {
  const Spectrum spec = run_spectrum(cfg, t, mode);
  std::optional<std::pair<double, double>> ppm_ref;
  if (cfg.carrier_ppm && cfg.reference_mhz)
    ppm_ref = std::make_pair(*cfg.carrier_ppm, *cfg.reference_mhz);
  auto os = open_output(out_dir, "spectrum.csv");
  write_spectrum_csv(os, spec, ppm_ref);
  std::cout << "wrote spectrum.csv (" << spec.freq_hz.size() << " bins) to "
            << out_dir << "\n";
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& cfg) {
  const VerifyReport report = run_verify(cfg);
  for (const auto& check : report.checks) {
    std::printf("%-18s %s  worst %.3g (tolerance %.0e)%s%s\n",
                check.name.c_str(), check.pass ? "pass" : "FAIL", check.worst,
                check.tolerance, check.detail.empty() ? "" : "  -- ",
                check.detail.c_str());
  }
  if (!report.all_pass) {
    std::cout << "error[4]: verification failed\n";
    return kExitVerify;
  }
  std::cout << "all checks passed\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spindec: exact density-matrix simulation of coupled nuclear spins\n"
      "(pulse-sequence scripts, gradient crushers, decoherence scans)"};
  app.require_subcommand(1);

  std::string config_path, script_path, out_dir, mode_text, window_text;
  double t_seconds = 0.0;
  int jobs = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", config_path, "experiment config file")
        ->required();
    if (needs_out)
      cmd->add_option("--out", out_dir,
                      "output directory (default: [paths] output_dir, else .)");
  };

  CLI::App* state = app.add_subcommand(
      "state", "run a script from equilibrium and report the final state");
  add_common(state, true);
  state->add_option("--script", script_path,
                    "script path, builtin:prep or builtin:entangle");

  CLI::App* scan = app.add_subcommand(
      "scan", "decoherence scan: peak amplitude vs evolution time + fit");
  add_common(scan, true);
  scan->add_option("--jobs", jobs, "worker threads (default: hardware)");
  scan->add_option("--mode", mode_text, "spectrum mode: real|magnitude");
  scan->add_option("--window", window_text, "peak window LO_HZ:HI_HZ");

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "spectrum after the readout pulse at a fixed time");
  add_common(spectrum, true);
  spectrum->add_option("--t", t_seconds, "evolution time in seconds")
      ->required();
  spectrum->add_option("--mode", mode_text, "spectrum mode: real|magnitude");

  CLI::App* verify =
      app.add_subcommand("verify", "run the cross-module identity checks");
  add_common(verify, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cout << "error[1]: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const ExperimentConfig cfg = load_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir.value_or(".");
    if (script_path.empty() && cfg.script_path) script_path = *cfg.script_path;
    if (state->parsed()) return cmd_state(cfg, script_path, out_dir);
    if (scan->parsed()) {
      ScanOptions opts;
      opts.jobs = jobs;
      opts.mode = parse_mode(mode_text);
      opts.window_hz = parse_window(window_text);
      return cmd_scan(cfg, opts, out_dir);
    }
    if (spectrum->parsed())
      return cmd_spectrum(cfg, t_seconds, parse_mode(mode_text), out_dir);
    if (verify->parsed()) return cmd_verify(cfg);
  } catch (const ConfigError& e) {
    std::cout << "error[1]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cout << "error[2]: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cout << "error[3]: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
