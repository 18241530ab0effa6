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

#include "spindec/opalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace spindec {

namespace {

Operator half_pauli(Axis axis) {
  Operator m(2, 2);
  switch (axis) {
    case Axis::X:
      m << 0.0, 0.5, 0.5, 0.0;
      break;
    case Axis::Y:
      m << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
      break;
    case Axis::Z:
      m << 0.5, 0.0, 0.0, -0.5;
      break;
  }
  return m;
}

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

int spin_count_of_dim(Eigen::Index dim) {
  if (dim < 2) throw std::invalid_argument("operator dimension below 2");
  int n = 0;
  Eigen::Index d = dim;
  while (d > 1) {
    if (d % 2 != 0)
      throw std::invalid_argument("operator dimension " + std::to_string(dim) +
                                  " is not a power of 2");
    d /= 2;
    ++n;
  }
  return n;
}

double z_quantum(int index, int k, int n) {
  const int bit = (index >> (n - k)) & 1;
  return bit == 0 ? 0.5 : -0.5;
}

Operator spin_operator(Axis axis, int k, int n, int max_spins) {
  if (n < 1 || n > max_spins)
    throw std::invalid_argument("spin count " + std::to_string(n) +
                                " outside [1, " + std::to_string(max_spins) +
                                "]");
  if (k < 1 || k > n)
    throw std::invalid_argument("spin index " + std::to_string(k) +
                                " out of range for n = " + std::to_string(n));
  Operator out = Operator::Identity(1, 1);
  for (int pos = 1; pos <= n; ++pos) {
    if (pos == k)
      out = kron(out, half_pauli(axis));
    else
      out = kron(out, Operator::Identity(2, 2));
  }
  return out;
}

Operator product_operator(const std::vector<std::pair<Axis, int>>& factors,
                          int n, double scale) {
  std::set<int> seen;
  for (const auto& [axis, k] : factors) {
    (void)axis;
    if (!seen.insert(k).second)
      throw std::invalid_argument("repeated spin index " + std::to_string(k) +
                                  " in product operator");
  }
  const Eigen::Index dim = Eigen::Index(1) << n;
  Operator out = scale * Operator::Identity(dim, dim);
  for (const auto& [axis, k] : factors) out = out * spin_operator(axis, k, n);
  return out;
}

double weighted_coherence_order(int row, int col,
                                const std::vector<double>& weights) {
  const int n = static_cast<int>(weights.size());
  double p = 0.0;
  for (int k = 1; k <= n; ++k)
    p += weights[k - 1] * (z_quantum(row, k, n) - z_quantum(col, k, n));
  return p;
}

CoherenceDecomposition coherence_orders(const Operator& rho,
                                        const std::vector<double>& weights,
                                        double zero_tol) {
  const int n = spin_count_of_dim(rho.rows());
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("coherence_orders: operator not square");
  if (static_cast<int>(weights.size()) != n)
    throw std::invalid_argument("coherence_orders: weight count " +
                                std::to_string(weights.size()) +
                                " does not match spin count " +
                                std::to_string(n));
  const Eigen::Index dim = rho.rows();
  // Identical (k-ordered) sums produce bit-identical doubles, so a plain
  // map keyed on the snapped order value partitions exactly.
  std::map<double, Eigen::MatrixXi> classes;
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      double p = weighted_coherence_order(static_cast<int>(r),
                                          static_cast<int>(c), weights);
      if (std::abs(p) < zero_tol) p = 0.0;
      auto [it, inserted] = classes.try_emplace(p);
      if (inserted) it->second = Eigen::MatrixXi::Zero(dim, dim);
      it->second(r, c) = 1;
    }
  }
  CoherenceDecomposition out;
  for (auto& [order, mask] : classes) {
    out.orders.push_back(order);
    out.masks.push_back(std::move(mask));
  }
  return out;
}

Operator matrix_exponential_unitary(const Operator& H, double t,
                                    double hermiticity_tol) {
  if (!is_hermitian(H, hermiticity_tol))
    throw std::invalid_argument(
        "matrix_exponential_unitary: input not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<Operator> solver(H);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("matrix_exponential_unitary: eigensolver failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    phases(i) = std::exp(Complex(0.0, -lambda(i) * t));
  return solver.eigenvectors() * phases.asDiagonal() *
         solver.eigenvectors().adjoint();
}

bool is_hermitian(const Operator& A, double tol) {
  if (A.rows() != A.cols()) return false;
  return (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Operator& U, double tol) {
  if (U.rows() != U.cols()) return false;
  const Operator gram = U.adjoint() * U;
  return (gram - Operator::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() <=
         tol;
}

double max_abs_diff(const Operator& A, const Operator& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

}  // namespace spindec
