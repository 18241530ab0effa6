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

#ifndef SPINDEC_PIPELINE_HPP
#define SPINDEC_PIPELINE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spindec/analysis.hpp"
#include "spindec/config.hpp"
#include "spindec/engine.hpp"
#include "spindec/pulseq.hpp"

namespace spindec {

struct ScanOptions {
  int jobs = 0;  // <= 0 picks the hardware thread count
  std::optional<std::pair<double, double>> window_hz;  // overrides the config
  std::optional<SpectrumMode> mode;                    // overrides the config
};

struct ScanResult {
  DecoherenceCurve curve;
  std::vector<double> envelope;  // analytic product-of-cosines per point
  std::vector<double> corner;    // corner coherence of the traced state
  std::optional<CosineFit> fit;  // empty when the curve is degenerate
  std::string fit_warning;
  double window_lo = 0.0, window_hi = 0.0;
  double phase_correction = 0.0;  // zero-order phase applied to all spectra
};

/// The decoherence scan: pseudo-pure preparation, entangling block,
/// refocused evolution over the time grid, readout pulse on spin 2,
/// decoupled FID, spectrum, windowed signed peak amplitude, cosine fit.
ScanResult run_scan(const ExperimentConfig& cfg, const ScanOptions& opts = {});

/// The same chain up to the spectrum at a single evolution time.
Spectrum run_spectrum(const ExperimentConfig& cfg, double t,
                      std::optional<SpectrumMode> mode_override = {});

struct StateReport {
  SimState final_state;
  Operator normalized;  // deviation-normalized final matrix
  std::string text;     // matrix + product-operator coefficient table
};

/// Run a script from the gamma-weighted equilibrium state.
StateReport run_state(const ExperimentConfig& cfg, const Sequence& script);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst observed deviation
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass = false;
};

/// Cross-module identity checks: refocusing echo identity, the
/// trace-reduction identity, the product-of-cosines envelope law for up to
/// four environment spins, and the builtin sequences against an
/// independent direct-multiplication oracle.
VerifyReport run_verify(const ExperimentConfig& cfg);

/// Deviation-matrix coefficient table over the product-operator basis.
std::string product_operator_report(const Operator& rho, int n);

struct ReferenceFit {
  double amplitude = 0.0;
  double period_s = 0.0;
};

/// Externally measured cosine fit shipped alongside a config (JSON with
/// "amplitude" and "period_seconds" fields).
ReferenceFit load_reference_fit(const std::string& path);

}  // namespace spindec

#endif  // SPINDEC_PIPELINE_HPP
