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

#include "spindec/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spindec {

namespace {

Operator conjugate(const Operator& U, const Operator& rho) {
  return U * rho * U.adjoint();
}

std::set<int> active_spins(const SpinSystem& sys,
                           const std::set<int>& decoupled) {
  std::set<int> active;
  for (int k = 1; k <= sys.n; ++k)
    if (!decoupled.count(k)) active.insert(k);
  return active;
}

}  // namespace

SimState equilibrium_state(const SpinSystem& sys) {
  sys.validate();
  const Eigen::Index dim = Eigen::Index(1) << sys.n;
  Operator rho = Operator::Zero(dim, dim);
  const bool two_spin_system = sys.system_spins.count(1) &&
                               sys.system_spins.count(2);
  for (int k : sys.system_spins) {
    const double gamma = (two_spin_system && k == 1) ? sys.gamma_ratio : 1.0;
    rho += gamma * spin_operator(Axis::Z, k, sys.n);
  }
  return SimState{std::move(rho), sys, sys.env_spins, 0.0};
}

Operator rf_propagator(double angle, Phase phase, const std::set<int>& targets,
                       int n) {
  if (targets.empty())
    throw std::invalid_argument("rf_propagator: empty target set");
  for (int k : targets)
    if (k < 1 || k > n)
      throw std::invalid_argument("rf_propagator: target spin " +
                                  std::to_string(k) + " out of range");
  const Eigen::Index dim = Eigen::Index(1) << n;
  Operator generator = Operator::Zero(dim, dim);
  const Axis axis =
      (phase == Phase::X || phase == Phase::MinusX) ? Axis::X : Axis::Y;
  const double sign =
      (phase == Phase::MinusX || phase == Phase::MinusY) ? -1.0 : 1.0;
  for (int k : targets) generator += sign * spin_operator(axis, k, n);
  // e^{+i angle G} = e^{-i G (-angle)}
  return matrix_exponential_unitary(generator, -angle);
}

SimState free_evolve(SimState state, double seconds) {
  if (seconds < 0.0)
    throw std::invalid_argument("free_evolve: negative duration");
  if (seconds == 0.0) return state;
  const Operator H =
      closed_hamiltonian(state.sys, active_spins(state.sys, state.decoupled));
  state.rho = conjugate(matrix_exponential_unitary(H, seconds), state.rho);
  state.clock += seconds;
  return state;
}

SimState gradient_crush(SimState state) {
  const Eigen::Index dim = state.rho.rows();
  const auto& weights = state.sys.gradient_weights;
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double p = weighted_coherence_order(static_cast<int>(r),
                                                static_cast<int>(c), weights);
      if (std::abs(p) >= kTolerances.coherence_zero) state.rho(r, c) = 0.0;
    }
  }
  return state;
}

SimState refocused_evolve(SimState state, double t) {
  if (t < 0.0)
    throw std::invalid_argument("refocused_evolve: negative duration");
  if (!state.decoupled.empty())
    throw std::invalid_argument(
        "refocused_evolve: decoupling must be off during the refocused block");
  const Operator U_half =
      matrix_exponential_unitary(full_hamiltonian(state.sys), t / 2.0);
  const Operator R = rf_propagator(std::numbers::pi, Phase::X,
                                   state.sys.all_spins(), state.sys.n);
  state.rho = conjugate(U_half * R * U_half, state.rho);
  state.clock += t;
  return state;
}

SimState run_sequence(SimState state, const Sequence& seq, RunLog* log) {
  for (const auto& event : seq.events) {
    if (const auto* rf = std::get_if<RfEvent>(&event)) {
      const std::set<int> targets(rf->targets.begin(), rf->targets.end());
      const Operator U =
          rf_propagator(rf->angle, rf->phase, targets, state.sys.n);
      state.rho = conjugate(U, state.rho);
    } else if (const auto* d = std::get_if<DelayEvent>(&event)) {
      if (!d->seconds)
        throw std::runtime_error(
            "run_sequence: delay duration was not evaluated");
      state = free_evolve(std::move(state), *d->seconds);
    } else if (std::get_if<GradientEvent>(&event)) {
      state = gradient_crush(std::move(state));
    } else if (const auto* dc = std::get_if<DecoupleEvent>(&event)) {
      for (int k : dc->targets) {
        if (dc->on)
          state.decoupled.insert(k);
        else
          state.decoupled.erase(k);
      }
    } else if (const auto* r = std::get_if<RefocusEvent>(&event)) {
      if (!r->seconds)
        throw std::runtime_error(
            "run_sequence: refocus duration was not evaluated");
      state = refocused_evolve(std::move(state), *r->seconds);
    }
    if (log && log->snapshots.size() < log->max_snapshots)
      log->snapshots.push_back(state);
  }
  return state;
}

SimState multi_env_evolve(SimState state, double t) {
  const SpinSystem& sys = state.sys;
  if (sys.system_spins != std::set<int>{1, 2})
    throw std::invalid_argument("multi_env_evolve requires system spins {1,2}");
  if (sys.n > kMaxSpins)
    throw std::invalid_argument("multi_env_evolve: spin count exceeds limit");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  Operator H = interaction_hamiltonian(sys);
  if (sys.j_hz(0, 1) != 0.0)
    H += kTwoPi * sys.j_hz(0, 1) *
         product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, sys.n);
  state.rho = conjugate(matrix_exponential_unitary(H, t), state.rho);
  state.clock += t;
  return state;
}

Operator deviation_normalized(const Operator& rho) {
  const Eigen::Index dim = rho.rows();
  Operator dev = rho - (rho.trace() / static_cast<double>(dim)) *
                           Operator::Identity(dim, dim);
  const double scale = dev.cwiseAbs().maxCoeff();
  if (scale > 0.0) dev /= scale;
  return dev;
}

bool deviation_equal(const Operator& a, const Operator& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return max_abs_diff(deviation_normalized(a), deviation_normalized(b)) <= tol;
}

}  // namespace spindec
