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

#ifndef SPINDEC_SPINSYS_HPP
#define SPINDEC_SPINSYS_HPP

#include <set>
#include <string>
#include <vector>

#include "spindec/opalg.hpp"
#include "spindec/types.hpp"

namespace spindec {

/// Physical description of the spin system. All frequencies are entered in
/// Hz and converted to rad/s inside the Hamiltonian builders; the API never
/// accepts rad/s.
struct SpinSystem {
  int n = 0;
  std::vector<std::string> labels;       // e.g. "C1", "C2", "H"
  std::vector<double> offset_hz;         // rotating-frame offsets nu_k
  Eigen::MatrixXd j_hz;                  // symmetric, zero diagonal
  std::vector<double> gradient_weights;  // relative gyromagnetic ratios
  double gamma_ratio = 1.0;              // gamma_1 / gamma_2, in (0, 1]
  std::set<int> system_spins;            // 1-based
  std::set<int> env_spins;

  std::set<int> all_spins() const;
  /// Throws std::invalid_argument when any invariant is violated.
  void validate() const;
};

/// H = sum_k -2 pi nu_k I_z^k + sum_{i<j} 2 pi J_ij I_z^i I_z^j  (rad/s).
Operator full_hamiltonian(const SpinSystem& sys);

/// full_hamiltonian with every term touching a non-active spin removed;
/// the matrix dimension stays 2^n. Models ideal decoupling.
Operator closed_hamiltonian(const SpinSystem& sys, const std::set<int>& active);

/// Coupling terms only: sum_{i<j} 2 pi J_ij I_z^i I_z^j.
Operator effective_hamiltonian(const SpinSystem& sys);

/// System-environment couplings for a {1,2} system:
/// sum_{k in env} 2 pi (J_1k I_z^1 I_z^k + J_2k I_z^2 I_z^k).
Operator interaction_hamiltonian(const SpinSystem& sys);

/// alpha = arccos(gamma_ratio); the pseudo-pure preparation flip angle.
double preparation_angle(const SpinSystem& sys);

}  // namespace spindec

#endif  // SPINDEC_SPINSYS_HPP
