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

#include "spindec/analysis.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

namespace spindec {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Operator partial_trace(const Operator& rho, int n,
                       const std::set<int>& traced) {
  if (rho.rows() != rho.cols() || rho.rows() != (Eigen::Index(1) << n))
    throw std::invalid_argument("partial_trace: dimension does not match n");
  if (traced.empty())
    throw std::invalid_argument("partial_trace: empty traced set");
  for (int k : traced)
    if (k < 1 || k > n)
      throw std::invalid_argument("partial_trace: traced spin " +
                                  std::to_string(k) + " out of range");
  if (static_cast<int>(traced.size()) == n)
    throw std::invalid_argument(
        "partial_trace: tracing every spin; use trace() instead");

  std::vector<int> kept;
  for (int k = 1; k <= n; ++k)
    if (!traced.count(k)) kept.push_back(k);
  const int n_keep = static_cast<int>(kept.size());
  const int n_env = n - n_keep;
  const Eigen::Index dim_keep = Eigen::Index(1) << n_keep;
  const Eigen::Index dim_env = Eigen::Index(1) << n_env;

  // full basis index from a kept-subspace index and an environment index
  std::vector<int> env(traced.begin(), traced.end());
  auto full_index = [&](Eigen::Index keep_idx, Eigen::Index env_idx) {
    Eigen::Index full = 0;
    for (int a = 0; a < n_keep; ++a)
      if ((keep_idx >> (n_keep - 1 - a)) & 1)
        full |= Eigen::Index(1) << (n - kept[a]);
    for (int a = 0; a < n_env; ++a)
      if ((env_idx >> (n_env - 1 - a)) & 1)
        full |= Eigen::Index(1) << (n - env[a]);
    return full;
  };

  Operator out = Operator::Zero(dim_keep, dim_keep);
  for (Eigen::Index i = 0; i < dim_keep; ++i)
    for (Eigen::Index j = 0; j < dim_keep; ++j)
      for (Eigen::Index e = 0; e < dim_env; ++e)
        out(i, j) += rho(full_index(i, e), full_index(j, e));
  return out;
}

double corner_coherence(const Operator& rho_reduced) {
  if (rho_reduced.rows() != 4 || rho_reduced.cols() != 4)
    throw std::invalid_argument("corner_coherence: expected a 4x4 operator");
  const double scale_in = std::max(1.0, rho_reduced.cwiseAbs().maxCoeff());
  if (!is_hermitian(rho_reduced, 1e-9 * scale_in))
    throw std::invalid_argument("corner_coherence: operator is not Hermitian");
  const Operator dev =
      rho_reduced - (rho_reduced.trace() / 4.0) * Operator::Identity(4, 4);
  const double gap = (dev(0, 0) - dev(1, 1)).real();
  const double scale = std::max(1.0, dev.cwiseAbs().maxCoeff());
  if (std::abs(gap) < 1e-12 * scale)
    throw std::domain_error(
        "corner_coherence: vanishing diagonal gap, state is outside the "
        "corner-coherence family");
  return dev(0, 3).real() / gap;
}

double analytic_envelope(
    double t, const std::vector<std::pair<double, double>>& couplings) {
  double env = 1.0;
  for (const auto& [j1k, j2k] : couplings) env *= std::cos(kPi * (j1k + j2k) * t);
  return env;
}

namespace {

int padded_length(int n_samples) {
  int n = std::max(2, n_samples);
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FidRecord simulate_fid(const SimState& state, const std::set<int>& detect,
                       double dwell, int n_samples, bool decouple_env,
                       double lb_hz, bool halve_first_point) {
  if (dwell <= 0.0)
    throw std::invalid_argument("simulate_fid: dwell must be positive");
  if (n_samples < 1)
    throw std::invalid_argument("simulate_fid: need at least one sample");
  if (lb_hz < 0.0)
    throw std::invalid_argument("simulate_fid: negative line broadening");
  if (detect.empty())
    throw std::invalid_argument("simulate_fid: empty detect set");
  const SpinSystem& sys = state.sys;
  for (int k : detect)
    if (!sys.system_spins.count(k))
      throw std::invalid_argument("simulate_fid: detect spin " +
                                  std::to_string(k) +
                                  " is not a system spin");

  std::set<int> active = sys.all_spins();
  if (decouple_env)
    for (int k : sys.env_spins) active.erase(k);
  const Operator H = closed_hamiltonian(sys, active);

  const Eigen::Index dim = state.rho.rows();
  Operator det_op = Operator::Zero(dim, dim);
  for (int k : detect)
    det_op += spin_operator(Axis::X, k, sys.n) +
              Complex(0.0, 1.0) * spin_operator(Axis::Y, k, sys.n);

  Eigen::SelfAdjointEigenSolver<Operator> solver(H);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const Operator& V = solver.eigenvectors();
  const Operator rho_v = V.adjoint() * state.rho * V;
  const Operator det_v = V.adjoint() * det_op * V;

  const int n_total = padded_length(n_samples);
  FidRecord fid;
  fid.dwell = dwell;
  fid.samples = Eigen::VectorXcd::Zero(n_total);
  fid.detect_spins.assign(detect.begin(), detect.end());
  fid.line_broadening_hz = lb_hz;

  for (int m = 0; m < n_samples; ++m) {
    const double t = m * dwell;
    Eigen::VectorXcd u(dim);
    for (Eigen::Index a = 0; a < dim; ++a)
      u(a) = std::exp(Complex(0.0, -lambda(a) * t));
    // tr(rho(t) det) with rho(t) = diag(u) rho_v diag(u)^*
    Complex s = 0.0;
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b)
        s += u(a) * rho_v(a, b) * std::conj(u(b)) * det_v(b, a);
    fid.samples(m) = s * std::exp(-kPi * lb_hz * t);
  }
  if (halve_first_point) fid.samples(0) *= 0.5;
  return fid;
}

Spectrum spectrum(const FidRecord& fid, SpectrumMode mode) {
  const Eigen::Index n = fid.samples.size();
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::invalid_argument("spectrum: FID length is not a power of 2");
  Eigen::FFT<double> fft;
  // Positive-exponent kernel: S_j = sum_m s_m e^{+2 pi i j m / N}, so a
  // positive rotating-frame offset appears at positive frequency.
  Eigen::VectorXcd raw(n);
  fft.inv(raw, fid.samples);
  raw *= static_cast<double>(n);

  Spectrum out;
  out.mode = mode;
  out.freq_hz.resize(n);
  out.amplitude.resize(n);
  const double df = 1.0 / (static_cast<double>(n) * fid.dwell);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + n / 2) % n;  // reorder to ascending frequency
    out.freq_hz(i) = (static_cast<double>(i) - static_cast<double>(n / 2)) * df;
    out.amplitude(i) = raw(j);
  }
  return out;
}

Spectrum phase_rotate(Spectrum spec, double phi) {
  spec.amplitude *= std::exp(Complex(0.0, phi));
  return spec;
}

double peak_amplitude(const Spectrum& spec, double lo_hz, double hi_hz) {
  if (!(lo_hz < hi_hz))
    throw std::invalid_argument("peak_amplitude: window bounds out of order");
  double best = -1.0;
  Eigen::Index best_bin = -1;
  for (Eigen::Index i = 0; i < spec.freq_hz.size(); ++i) {
    const double f = spec.freq_hz(i);
    if (f < lo_hz || f > hi_hz) continue;
    const double mag = std::abs(spec.amplitude(i));
    if (mag > best) {
      best = mag;
      best_bin = i;
    }
  }
  if (best_bin < 0)
    throw std::invalid_argument("peak_amplitude: window contains no bins");
  if (spec.mode == SpectrumMode::Real)
    return spec.amplitude(best_bin).real() < 0.0 ? -best : best;
  return best;
}

void DecoherenceCurve::validate() const {
  if (t.size() != amplitude.size())
    throw std::invalid_argument("curve: mismatched column lengths");
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0.0) throw std::invalid_argument("curve: negative time");
    if (i > 0 && t[i] <= t[i - 1])
      throw std::invalid_argument("curve: times are not strictly increasing");
  }
}

namespace {

double sum_squared_residual(const DecoherenceCurve& c, double A, double T) {
  double ssr = 0.0;
  for (size_t i = 0; i < c.t.size(); ++i) {
    const double r = A * std::cos(2.0 * kPi * c.t[i] / T) - c.amplitude[i];
    ssr += r * r;
  }
  return ssr;
}

/// Closed-form best amplitude for a fixed period.
double best_amplitude(const DecoherenceCurve& c, double T) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < c.t.size(); ++i) {
    const double ci = std::cos(2.0 * kPi * c.t[i] / T);
    num += ci * c.amplitude[i];
    den += ci * ci;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

CosineFit fit_cosine(const DecoherenceCurve& curve) {
  curve.validate();
  const size_t npts = curve.t.size();
  if (npts < 5)
    throw std::invalid_argument("fit_cosine: need at least 5 points");

  double peak = 0.0, mean = 0.0;
  for (double a : curve.amplitude) {
    peak = std::max(peak, std::abs(a));
    mean += a;
  }
  mean /= static_cast<double>(npts);
  if (peak <= 0.0)
    throw DegenerateDataError("fit_cosine: curve is identically zero");
  double variance = 0.0;
  for (double a : curve.amplitude) variance += (a - mean) * (a - mean);
  if (std::sqrt(variance / static_cast<double>(npts)) < 1e-9 * peak)
    throw DegenerateDataError("fit_cosine: curve is constant");

  const double span = curve.t.back() - curve.t.front();

  // Coarse period grid avoids the aliased local minima of a pure descent.
  double best_T = 0.0, best_A = 0.0, best_ssr = 0.0;
  bool have_best = false;
  for (int g = 0; g < 200; ++g) {
    const double T =
        span / 10.0 + (4.0 * span - span / 10.0) * g / 199.0;
    const double A = best_amplitude(curve, T);
    const double ssr = sum_squared_residual(curve, A, T);
    if (!have_best || ssr < best_ssr) {
      best_T = T;
      best_A = A;
      best_ssr = ssr;
      have_best = true;
    }
  }

  // Gauss-Newton on (A, T).
  double A = best_A, T = best_T;
  bool converged = false;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (size_t i = 0; i < npts; ++i) {
      const double w = 2.0 * kPi * curve.t[i] / T;
      const double r = A * std::cos(w) - curve.amplitude[i];
      const Eigen::Vector2d jac(std::cos(w),
                                A * std::sin(w) * w / T);  // d r / d(A, T)
      jtj += jac * jac.transpose();
      jtr += jac * r;
    }
    const Eigen::Vector2d step = jtj.ldlt().solve(-jtr);
    if (!step.allFinite()) break;
    double scale = 1.0;
    const double ssr0 = sum_squared_residual(curve, A, T);
    for (int backtrack = 0; backtrack < 20; ++backtrack) {
      const double A1 = A + scale * step(0);
      const double T1 = T + scale * step(1);
      if (T1 > 0.0 && sum_squared_residual(curve, A1, T1) <= ssr0) {
        A = A1;
        T = T1;
        break;
      }
      scale *= 0.5;
    }
    if (std::abs(scale * step(0)) <= 1e-12 * std::max(std::abs(A), 1e-300) &&
        std::abs(scale * step(1)) <= 1e-12 * T)
      converged = true;
  }
  if (!converged)
    throw std::runtime_error("fit_cosine: did not converge in 100 iterations");
  if (span < 0.5 * T * (1.0 - 1e-9))
    throw DegenerateDataError(
        "fit_cosine: data span below half the fitted period");

  CosineFit fit;
  fit.amplitude = A;
  fit.period = T;
  fit.rms_residual =
      std::sqrt(sum_squared_residual(curve, A, T) / static_cast<double>(npts));
  return fit;
}

void write_curve_csv(std::ostream& os, const DecoherenceCurve& curve) {
  os << "t_seconds,amplitude\n";
  for (size_t i = 0; i < curve.t.size(); ++i)
    os << fmt17(curve.t[i]) << "," << fmt17(curve.amplitude[i]) << "\n";
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec,
                        std::optional<std::pair<double, double>> ppm_ref) {
  os << (ppm_ref ? "freq_hz,re,im,ppm\n" : "freq_hz,re,im\n");
  for (Eigen::Index i = 0; i < spec.freq_hz.size(); ++i) {
    os << fmt17(spec.freq_hz(i)) << "," << fmt17(spec.amplitude(i).real())
       << "," << fmt17(spec.amplitude(i).imag());
    if (ppm_ref)
      os << "," << fmt17(ppm_ref->first + spec.freq_hz(i) / ppm_ref->second);
    os << "\n";
  }
}

}  // namespace spindec
