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

#include "spindec/pipeline.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace spindec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::pair<double, double>> environment_couplings(
    const SpinSystem& sys) {
  std::vector<std::pair<double, double>> out;
  for (int k : sys.env_spins)
    out.emplace_back(sys.j_hz(0, k - 1), sys.j_hz(1, k - 1));
  return out;
}

/// State after the builtin preparation and entangling blocks, decoupling
/// closed, ready for the refocused evolution.
SimState entangled_base_state(const ExperimentConfig& cfg) {
  const SpinSystem& sys = cfg.sys;
  const Sequence prep =
      evaluate_durations(compile_builtin("prep", sys), sys);
  const Sequence entangle =
      evaluate_durations(compile_builtin("entangle", sys), sys);
  SimState state = equilibrium_state(sys);
  state = run_sequence(std::move(state), prep);
  state = run_sequence(std::move(state), entangle);
  state.decoupled.clear();
  return state;
}

struct ScanPoint {
  double amplitude = 0.0;
  double corner = 0.0;
};

ScanPoint scan_point(const ExperimentConfig& cfg, const SimState& base,
                     double t, SpectrumMode mode, double phase_correction,
                     double lo, double hi) {
  ScanPoint out;
  SimState state = refocused_evolve(base, t);
  if (!state.sys.env_spins.empty()) {
    out.corner = corner_coherence(
        partial_trace(state.rho, state.sys.n, state.sys.env_spins));
  } else if (state.sys.n == 2) {
    out.corner = corner_coherence(state.rho);
  }
  const Operator readout =
      rf_propagator(kPi / 2.0, Phase::X, {2}, state.sys.n);
  state.rho = readout * state.rho * readout.adjoint();
  const FidRecord fid =
      simulate_fid(state, cfg.acq.detect, cfg.acq.dwell_s, cfg.acq.samples,
                   /*decouple_env=*/true, cfg.acq.line_broadening_hz,
                   cfg.acq.halve_first_point);
  Spectrum spec = spectrum(fid, mode);
  if (mode == SpectrumMode::Real && phase_correction != 0.0)
    spec = phase_rotate(std::move(spec), phase_correction);
  out.amplitude = peak_amplitude(spec, lo, hi);
  return out;
}

}  // namespace

ScanResult run_scan(const ExperimentConfig& cfg, const ScanOptions& opts) {
  const auto window = opts.window_hz ? opts.window_hz : cfg.scan.window_hz;
  if (!window)
    throw ConfigError(
        "no peak window configured; set [scan] window_hz or pass --window");
  const SpectrumMode mode =
      opts.mode.value_or(cfg.acq.mode.value_or(SpectrumMode::Real));
  const double lo = window->first, hi = window->second;

  const SimState base = entangled_base_state(cfg);

  const int points = cfg.scan.points;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = cfg.scan.t_start_s + (cfg.scan.t_stop_s - cfg.scan.t_start_s) *
                                       static_cast<double>(i) /
                                       static_cast<double>(points - 1);

  // Zero-order phase from the first point, chosen to maximize its peak.
  double phase_correction = 0.0;
  if (mode == SpectrumMode::Real) {
    SimState first = refocused_evolve(base, grid.front());
    const Operator readout =
        rf_propagator(kPi / 2.0, Phase::X, {2}, first.sys.n);
    first.rho = readout * first.rho * readout.adjoint();
    const Spectrum spec0 = spectrum(
        simulate_fid(first, cfg.acq.detect, cfg.acq.dwell_s, cfg.acq.samples,
                     true, cfg.acq.line_broadening_hz,
                     cfg.acq.halve_first_point),
        SpectrumMode::Real);
    double best = -1.0;
    Eigen::Index best_bin = -1;
    for (Eigen::Index i = 0; i < spec0.freq_hz.size(); ++i) {
      const double f = spec0.freq_hz(i);
      if (f < lo || f > hi) continue;
      if (std::abs(spec0.amplitude(i)) > best) {
        best = std::abs(spec0.amplitude(i));
        best_bin = i;
      }
    }
    if (best_bin < 0)
      throw ConfigError("peak window [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] Hz contains no spectrum bins");
    if (best > 0.0) phase_correction = -std::arg(spec0.amplitude(best_bin));
  }

  std::vector<ScanPoint> results(points);
  int jobs = opts.jobs > 0
                 ? opts.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, points));
  if (jobs == 1) {
    for (int i = 0; i < points; ++i)
      results[i] =
          scan_point(cfg, base, grid[i], mode, phase_correction, lo, hi);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < points; i = next.fetch_add(1))
          results[i] =
              scan_point(cfg, base, grid[i], mode, phase_correction, lo, hi);
      });
    }
    for (auto& worker : workers) worker.join();
  }

  ScanResult out;
  out.window_lo = lo;
  out.window_hi = hi;
  out.phase_correction = phase_correction;
  out.curve.t = grid;
  out.curve.amplitude.resize(points);
  out.corner.resize(points);
  out.envelope.resize(points);
  const auto couplings = environment_couplings(cfg.sys);
  for (int i = 0; i < points; ++i) {
    out.curve.amplitude[i] = results[i].amplitude;
    out.corner[i] = results[i].corner;
    out.envelope[i] = analytic_envelope(grid[i], couplings);
  }
  try {
    out.fit = fit_cosine(out.curve);
  } catch (const DegenerateDataError& e) {
    out.fit_warning = e.what();
  }
  return out;
}

Spectrum run_spectrum(const ExperimentConfig& cfg, double t,
                      std::optional<SpectrumMode> mode_override) {
  const SpectrumMode mode = mode_override.value_or(
      cfg.acq.mode.value_or(SpectrumMode::Magnitude));
  SimState state = refocused_evolve(entangled_base_state(cfg), t);
  const Operator readout = rf_propagator(kPi / 2.0, Phase::X, {2}, state.sys.n);
  state.rho = readout * state.rho * readout.adjoint();
  Spectrum spec = spectrum(
      simulate_fid(state, cfg.acq.detect, cfg.acq.dwell_s, cfg.acq.samples,
                   true, cfg.acq.line_broadening_hz,
                   cfg.acq.halve_first_point),
      mode);
  if (mode == SpectrumMode::Real) {
    Eigen::Index best_bin = 0;
    for (Eigen::Index i = 1; i < spec.amplitude.size(); ++i)
      if (std::abs(spec.amplitude(i)) > std::abs(spec.amplitude(best_bin)))
        best_bin = i;
    if (std::abs(spec.amplitude(best_bin)) > 0.0)
      spec = phase_rotate(std::move(spec), -std::arg(spec.amplitude(best_bin)));
  }
  return spec;
}

namespace {

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string matrix_to_text(const Operator& m) {
  // entries are normalized to max magnitude 1; drop display dust
  auto snap = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
  std::ostringstream os;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double re = snap(m(r, c).real());
      const double im = snap(m(r, c).imag());
      os << (c ? "  " : "") << fmt(re);
      if (im != 0.0) os << (im > 0 ? "+" : "") << fmt(im) << "i";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::string product_operator_report(const Operator& rho, int n) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument(
        "product_operator_report: dimension does not match n");
  struct Term {
    std::string name;
    double coefficient;
  };
  std::vector<Term> terms;
  const char* axis_names[] = {"x", "y", "z"};
  const Axis axes[] = {Axis::X, Axis::Y, Axis::Z};
  // 4^n - 1 basis operators: each spin carries 1, Ix, Iy or Iz.
  const long total = 1L << (2 * n);
  for (long code = 1; code < total; ++code) {
    std::vector<std::pair<Axis, int>> factors;
    std::string name;
    int q = 0;
    for (int k = 1; k <= n; ++k) {
      const int choice = static_cast<int>((code >> (2 * (k - 1))) & 3);
      if (choice == 0) continue;
      factors.emplace_back(axes[choice - 1], k);
      if (!name.empty()) name += "*";
      name += std::string("I") + axis_names[choice - 1] + std::to_string(k);
      ++q;
    }
    const Operator basis = product_operator(factors, n);
    // tr(B^2) = 2^(n - 2q) for a product of q half-Pauli factors
    const double norm = std::pow(2.0, n - 2 * q);
    const double coef = (basis * rho).trace().real() / norm;
    if (std::abs(coef) > 1e-8) terms.push_back({name, coef});
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    if (std::abs(a.coefficient) != std::abs(b.coefficient))
      return std::abs(a.coefficient) > std::abs(b.coefficient);
    return a.name < b.name;
  });
  std::ostringstream os;
  if (terms.empty()) {
    os << "product-operator decomposition: (traceless part is zero)\n";
    return os.str();
  }
  os << "product-operator decomposition:\n";
  for (const Term& t : terms)
    os << "  " << fmt(t.coefficient, "%+.4f") << "  " << t.name << "\n";
  double min_mag = std::abs(terms.front().coefficient);
  for (const Term& t : terms)
    min_mag = std::min(min_mag, std::abs(t.coefficient));
  os << "proportional form:";
  for (size_t i = 0; i < terms.size(); ++i) {
    const double scaled = terms[i].coefficient / min_mag;
    os << (i ? " " : " ") << (scaled < 0 ? "- " : (i ? "+ " : ""))
       << fmt(std::abs(scaled), "%.4g") << " " << terms[i].name;
  }
  os << "\n";
  return os.str();
}

StateReport run_state(const ExperimentConfig& cfg, const Sequence& script) {
  const Sequence evaluated = evaluate_durations(script, cfg.sys);
  SimState state = equilibrium_state(cfg.sys);
  state = run_sequence(std::move(state), evaluated);
  StateReport report;
  report.normalized = deviation_normalized(state.rho);
  std::ostringstream os;
  os << "final deviation matrix (normalized, dim " << state.rho.rows()
     << "):\n"
     << matrix_to_text(report.normalized) << "\n"
     << product_operator_report(state.rho, state.sys.n);
  report.final_state = std::move(state);
  report.text = os.str();
  return report;
}

// ---------------------------------------------------------------------------
// verify checks
// ---------------------------------------------------------------------------

namespace {

/// Direct-multiplication oracle for the builtin sequences. Closed-form
/// single-spin rotations, diagonal coupling phases and an explicit
/// entrywise crusher; shares no code with the engine's event dispatch.
namespace oracle {

Operator single_rotation(double angle, Phase phase) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  Operator u(2, 2);
  switch (phase) {  // e^{+i angle I_axis} = cos(a/2) 1 + i sin(a/2) sigma
    case Phase::X:
      u << Complex(c, 0), Complex(0, s), Complex(0, s), Complex(c, 0);
      break;
    case Phase::MinusX:
      u << Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0);
      break;
    case Phase::Y:
      u << Complex(c, 0), Complex(s, 0), Complex(-s, 0), Complex(c, 0);
      break;
    case Phase::MinusY:
      u << Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0);
      break;
  }
  return u;
}

Operator pulse(double angle, Phase phase, const std::set<int>& targets,
               int n) {
  Operator out = Operator::Identity(1, 1);
  for (int k = 1; k <= n; ++k) {
    const Operator factor = targets.count(k) ? single_rotation(angle, phase)
                                             : Operator::Identity(2, 2);
    Operator next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(2 * i, 2 * j, 2, 2) = out(i, j) * factor;
    out = next;
  }
  return out;
}

double m_of(int index, int k, int n) {
  return ((index >> (n - k)) & 1) ? -0.5 : 0.5;
}

Operator conjugate_delay(const SpinSystem& sys, const std::set<int>& active,
                         double t, const Operator& rho) {
  const Eigen::Index dim = rho.rows();
  Eigen::VectorXcd phase(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    double h = 0.0;
    for (int k = 1; k <= sys.n; ++k)
      if (active.count(k))
        h -= kTwoPi * sys.offset_hz[k - 1] * m_of(static_cast<int>(b), k, sys.n);
    for (int i = 1; i <= sys.n; ++i)
      for (int j = i + 1; j <= sys.n; ++j)
        if (active.count(i) && active.count(j))
          h += kTwoPi * sys.j_hz(i - 1, j - 1) *
               m_of(static_cast<int>(b), i, sys.n) *
               m_of(static_cast<int>(b), j, sys.n);
    phase(b) = std::exp(Complex(0.0, -h * t));
  }
  Operator out = rho;
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      out(r, c) *= phase(r) * std::conj(phase(c));
  return out;
}

Operator crush(const SpinSystem& sys, Operator rho) {
  const Eigen::Index dim = rho.rows();
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      double p = 0.0;
      for (int k = 1; k <= sys.n; ++k)
        p += sys.gradient_weights[k - 1] *
             (m_of(static_cast<int>(r), k, sys.n) -
              m_of(static_cast<int>(c), k, sys.n));
      if (std::abs(p) >= 1e-9) rho(r, c) = 0.0;
    }
  }
  return rho;
}

Operator apply_pulse(double angle, Phase phase, const std::set<int>& targets,
                     int n, const Operator& rho) {
  const Operator u = pulse(angle, phase, targets, n);
  return u * rho * u.adjoint();
}

/// Equilibrium -> pseudo-pure, environment decoupled throughout.
Operator prep(const SpinSystem& sys) {
  const int n = sys.n;
  const Eigen::Index dim = Eigen::Index(1) << n;
  std::set<int> active;
  for (int k : sys.system_spins) active.insert(k);
  Operator rho = Operator::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b)
    rho(b, b) = sys.gamma_ratio * m_of(static_cast<int>(b), 1, n) +
                m_of(static_cast<int>(b), 2, n);
  const double tau = 1.0 / (4.0 * sys.j_hz(0, 1));
  rho = apply_pulse(std::acos(sys.gamma_ratio), Phase::X, {2}, n, rho);
  rho = crush(sys, std::move(rho));
  rho = apply_pulse(kPi / 4.0, Phase::X, {1, 2}, n, rho);
  rho = conjugate_delay(sys, active, tau, rho);
  rho = apply_pulse(kPi, Phase::Y, {1, 2}, n, rho);
  rho = conjugate_delay(sys, active, tau, rho);
  rho = apply_pulse(-5.0 * kPi / 6.0, Phase::Y, {1, 2}, n, rho);
  rho = crush(sys, std::move(rho));
  return rho;
}

Operator entangle(const SpinSystem& sys, Operator rho) {
  const int n = sys.n;
  std::set<int> active;
  for (int k : sys.system_spins) active.insert(k);
  const double tau = 1.0 / (4.0 * sys.j_hz(0, 1));
  rho = apply_pulse(kPi / 2.0, Phase::X, {1, 2}, n, rho);
  rho = conjugate_delay(sys, active, tau, rho);
  rho = apply_pulse(kPi, Phase::X, {1, 2}, n, rho);
  rho = conjugate_delay(sys, active, tau, rho);
  rho = apply_pulse(kPi / 2.0, Phase::MinusY, {2}, n, rho);
  return rho;
}

}  // namespace oracle

VerifyCheck check_echo_identity(std::mt19937& rng) {
  VerifyCheck check{"echo-identity", false, 0.0, 1e-10,
                    "refocused block equals hard pulse times coupling-only "
                    "evolution, 50 random systems"};
  std::uniform_real_distribution<double> offset(-10e3, 10e3);
  std::uniform_real_distribution<double> coupling(0.0, 500.0);
  std::uniform_real_distribution<double> time(0.0, 20e-3);
  std::uniform_int_distribution<int> size(2, 4);
  for (int draw = 0; draw < 50; ++draw) {
    SpinSystem sys;
    sys.n = size(rng);
    sys.j_hz = Eigen::MatrixXd::Zero(sys.n, sys.n);
    for (int k = 0; k < sys.n; ++k) {
      sys.labels.push_back("S" + std::to_string(k + 1));
      sys.offset_hz.push_back(offset(rng));
      sys.gradient_weights.push_back(1.0);
      if (k == 0 || k == 1)
        sys.system_spins.insert(k + 1);
      else
        sys.env_spins.insert(k + 1);
    }
    for (int i = 0; i < sys.n; ++i)
      for (int j = i + 1; j < sys.n; ++j)
        sys.j_hz(i, j) = sys.j_hz(j, i) = coupling(rng);
    const double t = time(rng);
    const Operator half =
        matrix_exponential_unitary(full_hamiltonian(sys), t / 2.0);
    const Operator R =
        rf_propagator(kPi, Phase::X, sys.all_spins(), sys.n);
    const Operator lhs = half * R * half;
    const Operator rhs =
        R * matrix_exponential_unitary(effective_hamiltonian(sys), t);
    // phase from the largest-magnitude element ratio
    Eigen::Index br = 0, bc = 0;
    lhs.cwiseAbs().maxCoeff(&br, &bc);
    const Complex ratio = lhs(br, bc) / rhs(br, bc);
    const Operator rhs_phased = (ratio / std::abs(ratio)) * rhs;
    check.worst = std::max(check.worst, max_abs_diff(lhs, rhs_phased));
  }
  check.pass = check.worst < check.tolerance;
  return check;
}

VerifyCheck check_trace_identity(const SpinSystem& sys, std::mt19937& rng) {
  VerifyCheck check{"trace-identity", false, 0.0, 1e-9,
                    "reduced state after refocused evolution matches the "
                    "cosine-damped corner form"};
  if (sys.system_spins != std::set<int>{1, 2} || sys.env_spins.empty()) {
    check.pass = true;
    check.detail = "skipped: needs a {1,2} system with an environment";
    return check;
  }
  const int n = sys.n;
  const Operator entangled =
      product_operator({{Axis::X, 1}, {Axis::X, 2}}, n) -
      product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, n) -
      product_operator({{Axis::Y, 1}, {Axis::Y, 2}}, n);
  const auto couplings = environment_couplings(sys);
  std::uniform_real_distribution<double> time(0.0, 20e-3);
  for (int draw = 0; draw < 20; ++draw) {
    const double t = time(rng);
    SimState state{entangled, sys, {}, 0.0};
    state = refocused_evolve(std::move(state), t);
    const Operator reduced =
        partial_trace(state.rho, n, sys.env_spins) /
        std::pow(2.0, static_cast<double>(sys.env_spins.size()));
    const double envelope = analytic_envelope(t, couplings);
    const Operator expected =
        envelope * (product_operator({{Axis::X, 1}, {Axis::X, 2}}, 2) -
                    product_operator({{Axis::Y, 1}, {Axis::Y, 2}}, 2)) -
        product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, 2);
    check.worst = std::max(check.worst, max_abs_diff(reduced, expected));
    check.worst = std::max(
        check.worst, std::abs(corner_coherence(reduced) + envelope));
  }
  check.pass = check.worst < check.tolerance;
  return check;
}

VerifyCheck check_envelope_product(std::mt19937& rng) {
  VerifyCheck check{"envelope-product", false, 0.0, 1e-9,
                    "brute-force corner coherence equals the product of "
                    "cosines for 1 to 4 environment spins"};
  std::uniform_real_distribution<double> coupling(5.0, 300.0);
  std::uniform_real_distribution<double> time(0.0, 20e-3);
  for (int n_env = 1; n_env <= 4; ++n_env) {
    SpinSystem sys;
    sys.n = 2 + n_env;
    sys.j_hz = Eigen::MatrixXd::Zero(sys.n, sys.n);
    for (int k = 0; k < sys.n; ++k) {
      sys.labels.push_back("S" + std::to_string(k + 1));
      sys.offset_hz.push_back(0.0);
      sys.gradient_weights.push_back(1.0);
      if (k < 2)
        sys.system_spins.insert(k + 1);
      else
        sys.env_spins.insert(k + 1);
    }
    sys.j_hz(0, 1) = sys.j_hz(1, 0) = 103.1;
    for (int k : sys.env_spins) {
      sys.j_hz(0, k - 1) = sys.j_hz(k - 1, 0) = coupling(rng);
      sys.j_hz(1, k - 1) = sys.j_hz(k - 1, 1) = coupling(rng);
    }
    const Operator entangled =
        product_operator({{Axis::X, 1}, {Axis::X, 2}}, sys.n) -
        product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, sys.n) -
        product_operator({{Axis::Y, 1}, {Axis::Y, 2}}, sys.n);
    std::vector<std::pair<double, double>> couplings;
    for (int k : sys.env_spins)
      couplings.emplace_back(sys.j_hz(0, k - 1), sys.j_hz(1, k - 1));
    for (int draw = 0; draw < 20; ++draw) {
      const double t = time(rng);
      SimState state{entangled, sys, {}, 0.0};
      state = multi_env_evolve(std::move(state), t);
      const double corner = corner_coherence(
          partial_trace(state.rho, sys.n, sys.env_spins));
      check.worst = std::max(
          check.worst, std::abs(corner + analytic_envelope(t, couplings)));
    }
  }
  check.pass = check.worst < check.tolerance;
  return check;
}

VerifyCheck check_builtin_oracle(const SpinSystem& sys) {
  VerifyCheck check{"builtin-oracle", false, 0.0, 1e-12,
                    "sequence engine agrees with the direct-multiplication "
                    "oracle on the builtin blocks"};
  if (sys.system_spins != std::set<int>{1, 2} || sys.j_hz(0, 1) == 0.0) {
    check.pass = true;
    check.detail = "skipped: needs a {1,2} system with a nonzero J[1,2]";
    return check;
  }
  const Sequence prep_seq =
      evaluate_durations(compile_builtin("prep", sys), sys);
  const Sequence ent_seq =
      evaluate_durations(compile_builtin("entangle", sys), sys);
  SimState engine_state = equilibrium_state(sys);
  engine_state = run_sequence(std::move(engine_state), prep_seq);
  const Operator oracle_prep = oracle::prep(sys);
  check.worst =
      std::max(check.worst, max_abs_diff(engine_state.rho, oracle_prep));
  engine_state = run_sequence(std::move(engine_state), ent_seq);
  const Operator oracle_ent = oracle::entangle(sys, oracle_prep);
  check.worst =
      std::max(check.worst, max_abs_diff(engine_state.rho, oracle_ent));

  const Operator target_pp =
      product_operator({{Axis::Z, 1}}, sys.n) +
      product_operator({{Axis::Z, 2}}, sys.n) -
      2.0 * product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, sys.n);
  const Operator target_ent =
      product_operator({{Axis::X, 1}, {Axis::X, 2}}, sys.n) -
      product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, sys.n) -
      product_operator({{Axis::Y, 1}, {Axis::Y, 2}}, sys.n);
  const bool states_ok = deviation_equal(oracle_prep, target_pp, 1e-8) &&
                         deviation_equal(oracle_ent, target_ent, 1e-8);
  check.pass = check.worst < check.tolerance && states_ok;
  if (!states_ok)
    check.detail += " (prepared states deviate from their targets)";
  return check;
}

}  // namespace

VerifyReport run_verify(const ExperimentConfig& cfg) {
  std::mt19937 rng(0x5eed);
  VerifyReport report;
  report.checks.push_back(check_echo_identity(rng));
  report.checks.push_back(check_trace_identity(cfg.sys, rng));
  report.checks.push_back(check_envelope_product(rng));
  report.checks.push_back(check_builtin_oracle(cfg.sys));
  report.all_pass = true;
  for (const auto& check : report.checks) report.all_pass &= check.pass;
  return report;
}

ReferenceFit load_reference_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open reference fit file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
    ReferenceFit fit;
    fit.amplitude = doc.at("amplitude").get<double>();
    fit.period_s = doc.at("period_seconds").get<double>();
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed reference fit file '" + path +
                      "': " + e.what());
  }
}

}  // namespace spindec
