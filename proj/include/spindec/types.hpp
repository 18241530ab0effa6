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

#ifndef SPINDEC_TYPES_HPP
#define SPINDEC_TYPES_HPP

#include <Eigen/Dense>
#include <complex>

namespace spindec {

template <typename Scalar>
using OperatorT =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense 2^n x 2^n complex matrix. Doubles as Hamiltonian, propagator and
/// (deviation) density matrix; hbar = 1 throughout.
using Operator = OperatorT<double>;
using Complex = std::complex<double>;

/// Numerical tolerances used across the library. Every operation takes
/// its tolerance as a parameter; these are the pinned defaults.
struct Tolerances {
  double hermiticity = 1e-12;        // max |H - H^dag| elementwise
  double unitarity = 1e-10;          // max |U^dag U - 1| elementwise
  double operator_equality = 1e-10;  // max elementwise difference
  double deviation_equality = 1e-8;  // after deviation normalization
  double coherence_zero = 1e-9;      // |order| below this is order zero
};

inline constexpr Tolerances kTolerances{};

/// Hard cap on the spin count accepted by operator constructors. A dense
/// matrix at n = 12 is already 4096 x 4096; anything larger is a mistake.
inline constexpr int kMaxSpins = 12;

/// Single-spin operator axes.
enum class Axis { X, Y, Z };

/// RF pulse phase axes.
enum class Phase { X, Y, MinusX, MinusY };

}  // namespace spindec

#endif  // SPINDEC_TYPES_HPP
