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

#ifndef SPINDEC_ANALYSIS_HPP
#define SPINDEC_ANALYSIS_HPP

#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "spindec/engine.hpp"
#include "spindec/types.hpp"

namespace spindec {

/// Reduced operator after tracing out the given spins (1-based). The kept
/// spins retain their relative order. Tracing every spin is rejected.
Operator partial_trace(const Operator& rho, int n, const std::set<int>& traced);

/// Deviation-normalized corner element of a two-spin reduced state: the
/// real part of entry (|uu>, |dd>) scaled so the diagonal pattern
/// (1, 0, 0, 1) has unit amplitude. Sign-stable under an overall deviation
/// sign flip. For the corner-coherence Bell family this is the decoherence
/// envelope.
double corner_coherence(const Operator& rho_reduced);

/// prod_k cos(pi (J1k + J2k) t) over environment couplings in Hz.
double analytic_envelope(double t,
                         const std::vector<std::pair<double, double>>& couplings);

/// Complex FID samples. The sample count is a power of 2 (zero-padded).
struct FidRecord {
  double dwell = 0.0;  // seconds per sample
  Eigen::VectorXcd samples;
  std::vector<int> detect_spins;
  double line_broadening_hz = 0.0;
};

/// sample m = tr(rho(m dwell) sum_{k in detect} (I_x^k + i I_y^k))
///            * exp(-pi lb m dwell),
/// with rho evolving under the acquisition Hamiltonian (environment terms
/// removed when decouple_env is set) and the first point halved.
FidRecord simulate_fid(const SimState& state, const std::set<int>& detect,
                       double dwell, int n_samples, bool decouple_env,
                       double lb_hz, bool halve_first_point = true);

enum class SpectrumMode { Magnitude, Real };

struct Spectrum {
  Eigen::VectorXd freq_hz;      // ascending, spans +-1/(2 dwell)
  Eigen::VectorXcd amplitude;   // complex bin amplitudes
  SpectrumMode mode = SpectrumMode::Magnitude;
};

/// Discrete Fourier transform of the FID. The transform kernel is chosen
/// so that a spin with positive rotating-frame offset lands at positive
/// frequency.
Spectrum spectrum(const FidRecord& fid,
                  SpectrumMode mode = SpectrumMode::Magnitude);

/// Multiply all bins by e^{i phi} (zero-order phase correction).
Spectrum phase_rotate(Spectrum spec, double phi);

/// Largest-magnitude bin inside [lo_hz, hi_hz]. In Real mode the magnitude
/// is signed by the real part at that bin.
double peak_amplitude(const Spectrum& spec, double lo_hz, double hi_hz);

struct DecoherenceCurve {
  std::vector<double> t;          // strictly increasing, >= 0
  std::vector<double> amplitude;
  void validate() const;
};

struct CosineFit {
  double amplitude = 0.0;
  double period = 0.0;  // seconds
  double rms_residual = 0.0;
};

/// Thrown when the curve carries no oscillation to fit (all zeros or
/// constant).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least squares fit of A cos(2 pi t / T): coarse period grid (200 points
/// over [span/10, 4 span]) followed by Gauss-Newton on (A, T), at most 100
/// iterations, relative step tolerance 1e-12.
CosineFit fit_cosine(const DecoherenceCurve& curve);

/// "t_seconds,amplitude" rows at 17 significant digits.
void write_curve_csv(std::ostream& os, const DecoherenceCurve& curve);

/// "freq_hz,re,im" rows, plus a trailing ppm column when a reference is
/// given as (carrier_ppm, reference_mhz).
void write_spectrum_csv(std::ostream& os, const Spectrum& spec,
                        std::optional<std::pair<double, double>> ppm_ref);

}  // namespace spindec

#endif  // SPINDEC_ANALYSIS_HPP
