// Independent direct-multiplication oracle for the builtin experiment
// blocks. Everything here is closed form -- single-spin rotation matrices
// assembled by Kronecker product, diagonal phase factors for delays, and
// an explicit entrywise crusher -- so it shares no code path with the
// engine's event dispatch or with the eigendecomposition-based
// exponentials it checks.
#ifndef SPINDEC_TESTS_ORACLE_HPP
#define SPINDEC_TESTS_ORACLE_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "spindec/spinsys.hpp"

namespace spindec::testing::oracle {

using std::numbers::pi;

inline double m_of(int index, int k, int n) {
  return ((index >> (n - k)) & 1) ? -0.5 : 0.5;
}

/// Axis tags: 'x', 'y' and 'm' for the minus-y phase.
/// e^{+i angle I_axis} = cos(angle/2) 1 + i sin(angle/2) sigma_axis.
inline Operator rotation2(double angle, char axis) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  Operator u(2, 2);
  if (axis == 'x')
    u << Complex(c, 0), Complex(0, s), Complex(0, s), Complex(c, 0);
  else if (axis == 'y')
    u << Complex(c, 0), Complex(s, 0), Complex(-s, 0), Complex(c, 0);
  else  // 'm'
    u << Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0);
  return u;
}

inline Operator kron2(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Operator pulse_unitary(double angle, char axis,
                              const std::set<int>& targets, int n) {
  Operator u = Operator::Identity(1, 1);
  for (int k = 1; k <= n; ++k)
    u = kron2(u, targets.count(k) ? rotation2(angle, axis)
                                  : Operator::Identity(2, 2));
  return u;
}

inline Operator apply_pulse(double angle, char axis,
                            const std::set<int>& targets, int n,
                            const Operator& rho) {
  const Operator u = pulse_unitary(angle, axis, targets, n);
  return u * rho * u.adjoint();
}

/// rho -> e^{-iHt} rho e^{+iHt} for the diagonal Zeeman + zz Hamiltonian
/// restricted to the active spins, via per-basis-state phases.
inline Operator apply_delay(const SpinSystem& sys, const std::set<int>& active,
                            double t, Operator rho) {
  const Eigen::Index dim = rho.rows();
  const int n = sys.n;
  Eigen::VectorXcd phase(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    double h = 0.0;
    for (int k = 1; k <= n; ++k)
      if (active.count(k))
        h -= 2.0 * pi * sys.offset_hz[k - 1] * m_of(static_cast<int>(b), k, n);
    for (int i2 = 1; i2 <= n; ++i2)
      for (int j2 = i2 + 1; j2 <= n; ++j2)
        if (active.count(i2) && active.count(j2))
          h += 2.0 * pi * sys.j_hz(i2 - 1, j2 - 1) *
               m_of(static_cast<int>(b), i2, n) *
               m_of(static_cast<int>(b), j2, n);
    phase(b) = std::exp(Complex(0.0, -h * t));
  }
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      rho(r, c) *= phase(r) * std::conj(phase(c));
  return rho;
}

inline Operator apply_crush(const SpinSystem& sys, Operator rho) {
  const Eigen::Index dim = rho.rows();
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      double p = 0.0;
      for (int k = 1; k <= sys.n; ++k)
        p += sys.gradient_weights[k - 1] *
             (m_of(static_cast<int>(r), k, sys.n) -
              m_of(static_cast<int>(c), k, sys.n));
      if (std::abs(p) >= 1e-9) rho(r, c) = 0.0;
    }
  return rho;
}

inline Operator equilibrium(const SpinSystem& sys) {
  const Eigen::Index dim = Eigen::Index(1) << sys.n;
  Operator rho = Operator::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b)
    rho(b, b) = sys.gamma_ratio * m_of(static_cast<int>(b), 1, sys.n) +
                m_of(static_cast<int>(b), 2, sys.n);
  return rho;
}

/// The eight-event preparation block, environment decoupled.
inline Operator prep(const SpinSystem& sys) {
  const int n = sys.n;
  const std::set<int> active(sys.system_spins.begin(), sys.system_spins.end());
  const double tau = 1.0 / (4.0 * sys.j_hz(0, 1));
  Operator rho = equilibrium(sys);
  rho = apply_pulse(std::acos(sys.gamma_ratio), 'x', {2}, n, rho);
  rho = apply_crush(sys, std::move(rho));
  rho = apply_pulse(pi / 4.0, 'x', {1, 2}, n, rho);
  rho = apply_delay(sys, active, tau, std::move(rho));
  rho = apply_pulse(pi, 'y', {1, 2}, n, rho);
  rho = apply_delay(sys, active, tau, std::move(rho));
  rho = apply_pulse(-5.0 * pi / 6.0, 'y', {1, 2}, n, rho);
  rho = apply_crush(sys, std::move(rho));
  return rho;
}

/// The five-event entangling block applied to a given state.
inline Operator entangle(const SpinSystem& sys, Operator rho) {
  const int n = sys.n;
  const std::set<int> active(sys.system_spins.begin(), sys.system_spins.end());
  const double tau = 1.0 / (4.0 * sys.j_hz(0, 1));
  rho = apply_pulse(pi / 2.0, 'x', {1, 2}, n, rho);
  rho = apply_delay(sys, active, tau, std::move(rho));
  rho = apply_pulse(pi, 'x', {1, 2}, n, rho);
  rho = apply_delay(sys, active, tau, std::move(rho));
  rho = apply_pulse(pi / 2.0, 'm', {2}, n, rho);
  return rho;
}

}  // namespace spindec::testing::oracle

#endif  // SPINDEC_TESTS_ORACLE_HPP
