#pragma once

// Synthetic consistent test problems.
//
//   Type I:  A = U D V^T, U (m x r) and V (n x r) with orthonormal columns from
//            Gaussian matrices, D = diag of i.i.d. uniform (1, kappa) values.
//   Type II: A with i.i.d. standard normal entries.
// In both cases b = A x_true with x_true standard normal.
//
// Draw order from one Rng(seed): U entries (row-major), V entries, D, x_true
// for Type I; A entries (row-major), x_true for Type II.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "dsbgs/linalg.hpp"
#include "dsbgs/random.hpp"
#include "dsbgs/solver.hpp"

namespace dsbgs {

struct Type1Params {
  std::size_t m = 0, n = 0, rank = 0;
  double kappa = 2.0;
};

struct Type2Params {
  std::size_t m = 0, n = 0;
};

using ProblemKind = std::variant<Type1Params, Type2Params>;

struct GeneratedProblem {
  LinearSystem system;
  Vector x_true;
  ProblemKind kind;
  std::uint64_t seed = 0;
};

inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix G(rows, cols);
  for (double& v : G.entries()) v = rng.normal();
  return G;
}

/// Orthonormalizes the columns of M in place by modified Gram-Schmidt with one
/// reorthogonalization pass. Throws if the columns are numerically dependent.
inline void orthonormalize_columns(DenseMatrix& M) {
  const std::size_t m = M.rows();
  const std::size_t k = M.cols();
  for (std::size_t j = 0; j < k; ++j) {
    double original = 0;
    for (std::size_t i = 0; i < m; ++i) original += M(i, j) * M(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < j; ++p) {
        double proj = 0;
        for (std::size_t i = 0; i < m; ++i) proj += M(i, p) * M(i, j);
        for (std::size_t i = 0; i < m; ++i) M(i, j) -= proj * M(i, p);
      }
    }
    double nrm = 0;
    for (std::size_t i = 0; i < m; ++i) nrm += M(i, j) * M(i, j);
    nrm = std::sqrt(nrm);
    if (nrm <= 1e-12 * std::sqrt(original))
      throw std::runtime_error("orthonormalize_columns: dependent columns");
    for (std::size_t i = 0; i < m; ++i) M(i, j) /= nrm;
  }
}

inline GeneratedProblem gen_type1(std::size_t m, std::size_t n, std::size_t r, double kappa,
                                  std::uint64_t seed) {
  if (m == 0 || n == 0) throw std::invalid_argument("gen_type1: empty dimensions");
  if (r == 0 || r > std::min(m, n))
    throw std::invalid_argument("gen_type1: rank " + std::to_string(r) + " exceeds min(m, n) = " +
                                std::to_string(std::min(m, n)));
  if (!(kappa > 1.0)) throw std::invalid_argument("gen_type1: kappa must exceed 1");

  Rng rng(seed);
  DenseMatrix U = gaussian_matrix(m, r, rng);
  DenseMatrix V = gaussian_matrix(n, r, rng);
  orthonormalize_columns(U);
  orthonormalize_columns(V);
  Vector d(r);
  for (double& v : d) v = 1.0 + (kappa - 1.0) * rng.uniform01();

  DenseMatrix A(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < r; ++k) {
      const double u = U(i, k) * d[k];
      for (std::size_t j = 0; j < n; ++j) A(i, j) += u * V(j, k);
    }

  Vector x(n);
  for (double& v : x) v = rng.normal();
  Vector b = matvec(A, x);
  return {LinearSystem(std::move(A), std::move(b)), std::move(x), Type1Params{m, n, r, kappa}, seed};
}

inline GeneratedProblem gen_type2(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (m == 0 || n == 0) throw std::invalid_argument("gen_type2: empty dimensions");
  Rng rng(seed);
  DenseMatrix A = gaussian_matrix(m, n, rng);
  Vector x(n);
  for (double& v : x) v = rng.normal();
  Vector b = matvec(A, x);
  return {LinearSystem(std::move(A), std::move(b)), std::move(x), Type2Params{m, n}, seed};
}

/// Consistent right-hand side b = A x with standard normal x drawn from seed.
inline LinearSystem consistent_system(DenseMatrix A, std::uint64_t seed) {
  Rng rng(seed);
  Vector x(A.cols());
  for (double& v : x) v = rng.normal();
  Vector b = matvec(A, x);
  return LinearSystem(std::move(A), std::move(b));
}

}  // namespace dsbgs
