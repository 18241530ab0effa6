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

#ifndef SPINDEC_OPALG_HPP
#define SPINDEC_OPALG_HPP

#include <utility>
#include <vector>

#include "spindec/types.hpp"

namespace spindec {

// Basis convention used everywhere: spin 1 occupies the most significant
// bit of the basis index, bit value 0 is |up> (m = +1/2). For n = 2 the
// basis order is |uu>, |ud>, |du>, |dd>.

/// Number of spins for a 2^n dimension; throws if dim is not a power of 2.
int spin_count_of_dim(Eigen::Index dim);

/// z quantum number (+-1/2) of spin k (1-based) in basis state `index`.
double z_quantum(int index, int k, int n);

/// I_axis^k = 1 (x) ... (x) (sigma_axis/2) (x) ... (x) 1 with the
/// single-spin factor at position k.
Operator spin_operator(Axis axis, int k, int n, int max_spins = kMaxSpins);

/// scale * prod_k I_axis^k over distinct spins (commuting embeddings).
/// An empty factor list yields scale * identity.
Operator product_operator(const std::vector<std::pair<Axis, int>>& factors,
                          int n, double scale = 1.0);

/// Weighted coherence order of matrix entry (row, col):
///   p = sum_k w_k (m_k(row) - m_k(col)).
double weighted_coherence_order(int row, int col,
                                const std::vector<double>& weights);

/// Partition of all dim^2 entries of an operator into weighted coherence
/// order classes. Orders within `zero_tol` of zero are the order-zero class.
struct CoherenceDecomposition {
  std::vector<double> orders;           // ascending, one per class
  std::vector<Eigen::MatrixXi> masks;   // 0/1, same shape as the operator
};

CoherenceDecomposition coherence_orders(
    const Operator& rho, const std::vector<double>& weights,
    double zero_tol = kTolerances.coherence_zero);

/// e^{-iHt} via Hermitian eigendecomposition; exact unitarity at these dims.
/// Negative t gives e^{+iH|t|}. Throws if H is not Hermitian within tol.
Operator matrix_exponential_unitary(
    const Operator& H, double t,
    double hermiticity_tol = kTolerances.hermiticity);

bool is_hermitian(const Operator& A, double tol = kTolerances.hermiticity);
bool is_unitary(const Operator& U, double tol = kTolerances.unitarity);

/// Max elementwise absolute difference.
double max_abs_diff(const Operator& A, const Operator& B);

}  // namespace spindec

#endif  // SPINDEC_OPALG_HPP
