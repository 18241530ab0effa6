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

#include "spindec/spinsys.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spindec {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::set<int> SpinSystem::all_spins() const {
  std::set<int> all;
  for (int k = 1; k <= n; ++k) all.insert(k);
  return all;
}

void SpinSystem::validate() const {
  if (n < 1 || n > kMaxSpins)
    throw std::invalid_argument("spin count " + std::to_string(n) +
                                " outside [1, " + std::to_string(kMaxSpins) +
                                "]");
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("label count does not match spin count");
  if (static_cast<int>(offset_hz.size()) != n)
    throw std::invalid_argument("offset count does not match spin count");
  if (static_cast<int>(gradient_weights.size()) != n)
    throw std::invalid_argument(
        "gradient weight count does not match spin count");
  if (j_hz.rows() != n || j_hz.cols() != n)
    throw std::invalid_argument("J matrix is not n x n");
  for (int i = 0; i < n; ++i) {
    if (j_hz(i, i) != 0.0)
      throw std::invalid_argument("J matrix has a nonzero diagonal entry");
    for (int j = 0; j < n; ++j)
      if (j_hz(i, j) != j_hz(j, i))
        throw std::invalid_argument("J matrix is not symmetric");
  }
  if (!(gamma_ratio > 0.0 && gamma_ratio <= 1.0))
    throw std::invalid_argument("gamma_ratio must lie in (0, 1]");
  for (int k : system_spins)
    if (k < 1 || k > n)
      throw std::invalid_argument("system spin index out of range");
  for (int k : env_spins) {
    if (k < 1 || k > n)
      throw std::invalid_argument("environment spin index out of range");
    if (system_spins.count(k))
      throw std::invalid_argument(
          "spin " + std::to_string(k) + " is in both system and environment");
  }
  if (static_cast<int>(system_spins.size() + env_spins.size()) != n)
    throw std::invalid_argument(
        "system and environment do not partition the spins");
}

namespace {

Operator hamiltonian_terms(const SpinSystem& sys, const std::set<int>& active,
                           bool zeeman, bool couplings) {
  const Eigen::Index dim = Eigen::Index(1) << sys.n;
  Operator H = Operator::Zero(dim, dim);
  if (zeeman) {
    for (int k = 1; k <= sys.n; ++k) {
      if (!active.count(k) || sys.offset_hz[k - 1] == 0.0) continue;
      H -= kTwoPi * sys.offset_hz[k - 1] * spin_operator(Axis::Z, k, sys.n);
    }
  }
  if (couplings) {
    for (int i = 1; i <= sys.n; ++i) {
      for (int j = i + 1; j <= sys.n; ++j) {
        const double jij = sys.j_hz(i - 1, j - 1);
        if (jij == 0.0 || !active.count(i) || !active.count(j)) continue;
        H += kTwoPi * jij *
             product_operator({{Axis::Z, i}, {Axis::Z, j}}, sys.n);
      }
    }
  }
  return H;
}

}  // namespace

Operator full_hamiltonian(const SpinSystem& sys) {
  sys.validate();
  return hamiltonian_terms(sys, sys.all_spins(), true, true);
}

Operator closed_hamiltonian(const SpinSystem& sys,
                            const std::set<int>& active) {
  sys.validate();
  if (active.empty())
    throw std::invalid_argument("closed_hamiltonian: empty active set");
  for (int k : active)
    if (k < 1 || k > sys.n)
      throw std::invalid_argument("closed_hamiltonian: active spin " +
                                  std::to_string(k) + " out of range");
  return hamiltonian_terms(sys, active, true, true);
}

Operator effective_hamiltonian(const SpinSystem& sys) {
  sys.validate();
  return hamiltonian_terms(sys, sys.all_spins(), false, true);
}

Operator interaction_hamiltonian(const SpinSystem& sys) {
  sys.validate();
  if (sys.system_spins != std::set<int>{1, 2})
    throw std::invalid_argument(
        "interaction_hamiltonian requires system spins {1, 2}");
  const Eigen::Index dim = Eigen::Index(1) << sys.n;
  Operator H = Operator::Zero(dim, dim);
  for (int k : sys.env_spins) {
    for (int s : {1, 2}) {
      const double jsk = sys.j_hz(s - 1, k - 1);
      if (jsk == 0.0) continue;
      H += kTwoPi * jsk * product_operator({{Axis::Z, s}, {Axis::Z, k}}, sys.n);
    }
  }
  return H;
}

double preparation_angle(const SpinSystem& sys) {
  if (!(sys.gamma_ratio > 0.0 && sys.gamma_ratio <= 1.0))
    throw std::invalid_argument("preparation_angle: gamma ratio " +
                                std::to_string(sys.gamma_ratio) +
                                " outside (0, 1]");
  return std::acos(sys.gamma_ratio);
}

}  // namespace spindec
