#pragma once

// Dense kernels, singular value decomposition and the pseudoinverse oracle.
//
// Everything here works on row-major double-precision storage. The SVD is a
// one-sided Jacobi (Hestenes) iteration, preceded by a Householder QR when the
// matrix is tall, so singular values come out to high relative accuracy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dsbgs {

using Vector = std::vector<double>;

/// Row-major dense matrix with finite entries.
class DenseMatrix {
public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("DenseMatrix: entries length " + std::to_string(data_.size()) +
                                  " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("DenseMatrix: non-finite entry");
  }

  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("DenseMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const double> entries() const noexcept { return data_; }
  std::span<double> entries() noexcept { return data_; }

  DenseMatrix transposed() const {
    DenseMatrix T(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) T(j, i) = (*this)(i, j);
    return T;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(std::span<const double> a) { return dot(a, a); }
inline double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("subtract: length mismatch");
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

inline Vector matvec(const DenseMatrix& A, std::span<const double> x) {
  if (x.size() != A.cols())
    throw std::invalid_argument("matvec: vector length " + std::to_string(x.size()) +
                                " != cols " + std::to_string(A.cols()));
  Vector y(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) y[i] = dot(A.row(i), x);
  return y;
}

inline Vector matvec_transpose(const DenseMatrix& A, std::span<const double> y) {
  if (y.size() != A.rows())
    throw std::invalid_argument("matvec_transpose: vector length " + std::to_string(y.size()) +
                                " != rows " + std::to_string(A.rows()));
  Vector x(A.cols(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto r = A.row(i);
    const double yi = y[i];
    for (std::size_t j = 0; j < A.cols(); ++j) x[j] += r[j] * yi;
  }
  return x;
}

inline DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.cols() != B.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  DenseMatrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < B.cols(); ++j) C(i, j) += a * B(k, j);
    }
  return C;
}

/// A(rows, cols) gathered into a fresh matrix.
inline DenseMatrix submatrix(const DenseMatrix& A, std::span<const std::size_t> rows,
                             std::span<const std::size_t> cols) {
  DenseMatrix S(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t c = 0; c < cols.size(); ++c) S(a, c) = A(rows[a], cols[c]);
  return S;
}

inline double frobenius_norm_sq(const DenseMatrix& M) { return norm2_sq(M.entries()); }

// ---------------------------------------------------------------------------
// SVD

/// Thin SVD A = U diag(sigma) V^T with sigma sorted descending.
/// U is rows x k, V is cols x k, k = min(rows, cols).
struct Svd {
  DenseMatrix U;
  Vector sigma;
  DenseMatrix V;
};

namespace detail {

// Column-major scratch matrix used by the Jacobi sweeps; columns are contiguous.
struct ColumnStore {
  std::size_t len = 0;
  std::size_t count = 0;
  std::vector<double> data;
  double* col(std::size_t j) { return data.data() + j * len; }
  const double* col(std::size_t j) const { return data.data() + j * len; }
};

// One-sided Jacobi on the columns of W (len x count). Accumulates the right
// rotations into V (count x count, column-major). On exit the columns of W are
// mutually orthogonal: W = U Sigma.
inline void jacobi_orthogonalize(ColumnStore& W, ColumnStore& V) {
  const std::size_t n = W.count;
  const std::size_t m = W.len;
  constexpr double eps = 1e-15;
  constexpr int max_sweeps = 80;

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* w = W.col(j);
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += w[i] * w[i];
    norms[j] = s;
  }
  double total = std::accumulate(norms.begin(), norms.end(), 0.0);
  const double tiny = std::max(total, 1e-300) * 1e-32;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = norms[p];
        double beta = norms[q];
        if (alpha <= tiny || beta <= tiny) continue;
        double* wp = W.col(p);
        double* wq = W.col(q);
        double gamma = 0;
        for (std::size_t i = 0; i < m; ++i) gamma += wp[i] * wq[i];
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        double np = 0, nq = 0;
        for (std::size_t i = 0; i < m; ++i) {
          const double a = wp[i];
          const double b = wq[i];
          const double ra = c * a - s * b;
          const double rb = s * a + c * b;
          wp[i] = ra;
          wq[i] = rb;
          np += ra * ra;
          nq += rb * rb;
        }
        norms[p] = np;
        norms[q] = nq;
        double* vp = V.col(p);
        double* vq = V.col(q);
        for (std::size_t i = 0; i < V.len; ++i) {
          const double a = vp[i];
          const double b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    if (!rotated) break;
  }
}

// SVD of a matrix with rows >= cols.
inline Svd svd_tall(const DenseMatrix& A) {
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();

  // Householder QR when clearly tall: A = Q R, Jacobi then runs on n x n R.
  const bool use_qr = m > n + n / 4;
  ColumnStore W;
  std::vector<double> qr;          // column-major m x n, reflectors below diagonal
  std::vector<double> tau;
  if (use_qr) {
    qr.assign(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) qr[j * m + i] = A(i, j);
    tau.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double* ak = qr.data() + k * m;
      double nrm = 0;
      for (std::size_t i = k; i < m; ++i) nrm += ak[i] * ak[i];
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) continue;
      const double alpha = ak[k] > 0 ? -nrm : nrm;
      const double v0 = ak[k] - alpha;
      // v = (1, ak[k+1..]/v0), H = I - tau v v^T
      for (std::size_t i = k + 1; i < m; ++i) ak[i] /= v0;
      tau[k] = -v0 / alpha;
      ak[k] = alpha;
      for (std::size_t j = k + 1; j < n; ++j) {
        double* aj = qr.data() + j * m;
        double s = aj[k];
        for (std::size_t i = k + 1; i < m; ++i) s += ak[i] * aj[i];
        s *= tau[k];
        aj[k] -= s;
        for (std::size_t i = k + 1; i < m; ++i) aj[i] -= s * ak[i];
      }
    }
    W.len = n;
    W.count = n;
    W.data.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i <= j; ++i) W.data[j * n + i] = qr[j * m + i];
  } else {
    W.len = m;
    W.count = n;
    W.data.assign(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) W.data[j * m + i] = A(i, j);
  }

  ColumnStore V{n, n, std::vector<double>(n * n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) V.data[j * n + j] = 1.0;

  jacobi_orthogonalize(W, V);

  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* w = W.col(j);
    double s = 0;
    for (std::size_t i = 0; i < W.len; ++i) s += w[i] * w[i];
    sig[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sig[a] > sig[b]; });

  Svd out{DenseMatrix(m, n), Vector(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sig[j];
    for (std::size_t i = 0; i < n; ++i) out.V(i, k) = V.data[j * n + i];
  }

  // Left singular vectors; columns with zero singular value stay zero.
  std::vector<double> u(m);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    const double s = sig[j];
    if (s == 0.0) continue;
    std::fill(u.begin(), u.end(), 0.0);
    const double* w = W.col(j);
    for (std::size_t i = 0; i < W.len; ++i) u[i] = w[i] / s;
    if (use_qr) {
      for (std::size_t kk = n; kk-- > 0;) {
        if (tau[kk] == 0.0) continue;
        const double* v = qr.data() + kk * m;
        double d = u[kk];
        for (std::size_t i = kk + 1; i < m; ++i) d += v[i] * u[i];
        d *= tau[kk];
        u[kk] -= d;
        for (std::size_t i = kk + 1; i < m; ++i) u[i] -= d * v[i];
      }
    }
    for (std::size_t i = 0; i < m; ++i) out.U(i, k) = u[i];
  }
  return out;
}

}  // namespace detail

/// Thin SVD via one-sided Jacobi.
inline Svd svd(const DenseMatrix& A) {
  if (A.rows() >= A.cols()) return detail::svd_tall(A);
  Svd t = detail::svd_tall(A.transposed());
  return Svd{std::move(t.V), std::move(t.sigma), std::move(t.U)};
}

inline Vector singular_values(const DenseMatrix& A) { return svd(A).sigma; }

/// sigma_1(M)^2. Zero for the zero matrix.
inline double spectral_norm_sq(const DenseMatrix& M) {
  if (M.empty() || frobenius_norm_sq(M) == 0.0) return 0.0;
  const double s = singular_values(M).front();
  return s * s;
}

// ---------------------------------------------------------------------------
// spectral info and pseudoinverse

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kDefaultConsistencyTol = 1e-8;

struct SpectralInfo {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double sigma_max = 0;      // sigma_1
  double sigma_min_pos = 0;  // sigma_r
  std::size_t rank = 0;
  double frob_sq = 0;
  double cond = 0;
  Vector singular_values;  // the r retained values, descending
};

/// Number of singular values above rank_tol * sigma_1.
inline std::size_t numerical_rank(std::span<const double> sigma, double rank_tol) {
  if (sigma.empty() || sigma.front() == 0.0) return 0;
  const double cut = rank_tol * sigma.front();
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [cut](double s) { return s > cut; }));
}

inline SpectralInfo spectral_info(const DenseMatrix& A, double rank_tol = kDefaultRankTol) {
  if (rank_tol <= 0) throw std::invalid_argument("spectral_info: rank_tol must be positive");
  if (A.empty() || frobenius_norm_sq(A) == 0.0)
    throw std::invalid_argument("zero matrix has no spectral info");
  const Vector sigma = singular_values(A);
  SpectralInfo info;
  info.rows = A.rows();
  info.cols = A.cols();
  info.rank = numerical_rank(sigma, rank_tol);
  info.singular_values.assign(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(info.rank));
  info.sigma_max = sigma.front();
  info.sigma_min_pos = info.singular_values.back();
  info.frob_sq = frobenius_norm_sq(A);
  info.cond = info.sigma_max / info.sigma_min_pos;
  return info;
}

/// Moore-Penrose pseudoinverse (n x m) from the truncated SVD.
inline DenseMatrix pseudoinverse(const DenseMatrix& A, double rank_tol = kDefaultRankTol) {
  const Svd d = svd(A);
  const std::size_t r = numerical_rank(d.sigma, rank_tol);
  DenseMatrix P(A.cols(), A.rows());
  for (std::size_t k = 0; k < r; ++k) {
    const double inv = 1.0 / d.sigma[k];
    for (std::size_t i = 0; i < A.cols(); ++i) {
      const double v = d.V(i, k) * inv;
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < A.rows(); ++j) P(i, j) += v * d.U(j, k);
    }
  }
  return P;
}

struct OracleSolution {
  Vector x_pinv;   // A^+ b
  Vector x0_star;  // (I - A^+ A) x0 + A^+ b
  bool consistent = false;
  std::size_t rank = 0;
};

/// Minimum-norm least-squares solution and the projection of x0 onto the
/// solution set, both from a truncated SVD. An empty x0 means the zero vector.
inline OracleSolution pinv_solve(const DenseMatrix& A, std::span<const double> b,
                                 std::span<const double> x0 = {},
                                 double rank_tol = kDefaultRankTol,
                                 double consistency_tol = kDefaultConsistencyTol) {
  if (b.size() != A.rows())
    throw std::invalid_argument("pinv_solve: rhs length " + std::to_string(b.size()) +
                                " != rows " + std::to_string(A.rows()));
  if (!x0.empty() && x0.size() != A.cols())
    throw std::invalid_argument("pinv_solve: x0 length mismatch");
  if (A.empty() || frobenius_norm_sq(A) == 0.0)
    throw std::invalid_argument("pinv_solve: zero matrix");

  const Svd d = svd(A);
  const std::size_t r = numerical_rank(d.sigma, rank_tol);
  const std::size_t n = A.cols();

  OracleSolution out;
  out.rank = r;
  out.x_pinv.assign(n, 0.0);
  Vector vtx0(r, 0.0);
  for (std::size_t k = 0; k < r; ++k) {
    double ub = 0;
    for (std::size_t i = 0; i < A.rows(); ++i) ub += d.U(i, k) * b[i];
    const double coef = ub / d.sigma[k];
    for (std::size_t i = 0; i < n; ++i) out.x_pinv[i] += coef * d.V(i, k);
    if (!x0.empty())
      for (std::size_t i = 0; i < n; ++i) vtx0[k] += d.V(i, k) * x0[i];
  }

  out.x0_star = out.x_pinv;
  if (!x0.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      double proj = 0;
      for (std::size_t k = 0; k < r; ++k) proj += d.V(i, k) * vtx0[k];
      out.x0_star[i] += x0[i] - proj;
    }
  }

  const Vector res = subtract(matvec(A, out.x_pinv), b);
  out.consistent = norm2(res) <= consistency_tol * std::max(1.0, norm2(b));
  return out;
}

}  // namespace dsbgs
