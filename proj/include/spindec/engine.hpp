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

#ifndef SPINDEC_ENGINE_HPP
#define SPINDEC_ENGINE_HPP

#include <cstddef>
#include <set>
#include <vector>

#include "spindec/pulseq.hpp"
#include "spindec/spinsys.hpp"
#include "spindec/types.hpp"

namespace spindec {

// Rotation conventions, fixed once for the whole simulator:
//   rf pulses        U = e^{+i angle sum_k I_axis^k}
//   free evolution   U = e^{-iHt}
// Deviation-matrix semantics: the identity component of rho is never
// tracked; states compare equal up to an additive multiple of identity and
// a positive scale (see deviation_equal).

/// A deviation density matrix together with its spin system, the set of
/// currently decoupled spins and the elapsed time.
struct SimState {
  Operator rho;
  SpinSystem sys;
  std::set<int> decoupled;
  double clock = 0.0;
};

/// gamma-weighted thermal deviation state over the system spins
/// (gamma_ratio on spin 1 when the system is {1,2}); environment spins
/// start out decoupled.
SimState equilibrium_state(const SpinSystem& sys);

/// U = e^{+i angle sum_{k in targets} I_axis^k}; -x/-y negate the generator.
Operator rf_propagator(double angle, Phase phase, const std::set<int>& targets,
                       int n);

/// rho <- U rho U^dag with U = e^{-iHt},
/// H = closed_hamiltonian(sys, all - decoupled). Advances the clock.
SimState free_evolve(SimState state, double seconds);

/// Ideal strong crusher: zeroes every entry whose weighted coherence order
/// (weights = sys.gradient_weights) is nonzero. Idempotent; keeps the
/// diagonal untouched.
SimState gradient_crush(SimState state);

/// The refocused evolution block: e^{-iH t/2} R e^{-iH t/2} with
/// H = full_hamiltonian and R a hard pi pulse about x on all spins.
/// Equals R e^{-i H_ef t} exactly, which is what cancels all Zeeman terms.
/// Requires t >= 0 and no decoupled spins.
SimState refocused_evolve(SimState state, double t);

/// Ordered intermediate states, one snapshot per applied event.
struct RunLog {
  std::vector<SimState> snapshots;
  std::size_t max_snapshots = SIZE_MAX;
};

/// Applies events left to right. Delays must have evaluated durations.
SimState run_sequence(SimState state, const Sequence& seq,
                      RunLog* log = nullptr);

/// rho <- e^{-i(H_i + H_12)t} rho e^{+i(H_i + H_12)t} for a {1,2} system
/// with an arbitrary environment; H_i couples each environment spin to the
/// system and H_12 is the intra-system coupling term.
SimState multi_env_evolve(SimState state, double t);

/// Remove the trace part and scale so the largest magnitude entry is 1.
Operator deviation_normalized(const Operator& rho);

/// Equality up to an additive multiple of identity and a positive scale.
bool deviation_equal(const Operator& a, const Operator& b,
                     double tol = kTolerances.deviation_equality);

}  // namespace spindec

#endif  // SPINDEC_ENGINE_HPP
