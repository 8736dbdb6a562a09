#pragma once

// Test-only reference computations. Nothing here calls into the solver's
// kernels; each routine restates its formula directly.

#include <cmath>
#include <cstddef>
#include <vector>

#include "dsbgs/linalg.hpp"
#include "dsbgs/random.hpp"

namespace dsbgs::testing {

inline DenseMatrix random_matrix(std::size_t m, std::size_t n, Rng& rng) {
  DenseMatrix A(m, n);
  for (double& v : A.entries()) v = rng.normal();
  return A;
}

inline Vector random_vector(std::size_t n, Rng& rng) {
  Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

/// Random m x n matrix of rank r as a product of Gaussian factors.
inline DenseMatrix random_low_rank(std::size_t m, std::size_t n, std::size_t r, Rng& rng) {
  return matmul(random_matrix(m, r, rng), random_matrix(r, n, rng));
}

inline double max_abs_diff(const DenseMatrix& A, const DenseMatrix& B) {
  double d = 0;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) d = std::max(d, std::abs(A(i, j) - B(i, j)));
  return d;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// (I - c M) where M is square.
inline DenseMatrix identity_minus(const DenseMatrix& M, double c) {
  DenseMatrix R(M.rows(), M.cols());
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t j = 0; j < M.cols(); ++j) R(i, j) = (i == j ? 1.0 : 0.0) - c * M(i, j);
  return R;
}

/// M^k v by repeated multiplication.
inline Vector power_apply(const DenseMatrix& M, Vector v, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) v = matvec(M, v);
  return v;
}

}  // namespace dsbgs::testing
