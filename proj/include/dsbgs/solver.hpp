#pragma once

// Doubly stochastic block Gauss-Seidel iteration.
//
// One step with sampled block (I, J):
//   delta_J = -alpha * A_{I,J}^T r_I / ||A_{I,J}||_F^2,   r = A x - b
//   x_J    += delta_J
// The block (I, J) is drawn with probability ||A_{I,J}||_F^2 / ||A||_F^2.
//
// The residual r_I can be obtained two ways:
//   maintained: keep r = Ax - b cached and update it with A_{:,J} delta_J,
//               O(|I||J| + m|J|) per step
//   on_demand:  recompute r_I = A_{I,:} x - b_I, O(|I| n) per step
// ResidualMode::automatic picks whichever is cheaper for the partition.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsbgs/linalg.hpp"
#include "dsbgs/partition.hpp"
#include "dsbgs/random.hpp"

namespace dsbgs {

struct LinearSystem {
  DenseMatrix A;
  Vector b;

  LinearSystem() = default;
  LinearSystem(DenseMatrix a, Vector rhs) : A(std::move(a)), b(std::move(rhs)) {
    if (b.size() != A.rows())
      throw std::invalid_argument("LinearSystem: rhs length " + std::to_string(b.size()) +
                                  " != rows " + std::to_string(A.rows()));
    if (A.empty() || frobenius_norm_sq(A) == 0.0)
      throw std::invalid_argument("LinearSystem: coefficient matrix is zero");
  }

  std::size_t rows() const noexcept { return A.rows(); }
  std::size_t cols() const noexcept { return A.cols(); }
};

enum class StopRule { error_to_pinv, residual_norm, iteration_cap };
enum class ResidualMode { automatic, maintained, on_demand };

struct SolverConfig {
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_iters = 1'000'000;
  StopRule stop_rule = StopRule::error_to_pinv;
  double tol = 1e-5;
  std::size_t history_stride = 10;  // 0 disables history
  Vector x0;                        // empty means zero
  ResidualMode residual_mode = ResidualMode::automatic;
};

struct IterateState {
  Vector x;
  Vector r;  // A x - b
  std::size_t k = 0;

  static IterateState start(const LinearSystem& sys, std::span<const double> x0 = {}) {
    IterateState st;
    if (x0.empty()) {
      st.x.assign(sys.cols(), 0.0);
    } else {
      if (x0.size() != sys.cols()) throw std::invalid_argument("IterateState: x0 length mismatch");
      st.x.assign(x0.begin(), x0.end());
    }
    st.r = subtract(matvec(sys.A, st.x), sys.b);
    return st;
  }

  void refresh_residual(const LinearSystem& sys) { r = subtract(matvec(sys.A, x), sys.b); }
};

struct HistoryPoint {
  std::size_t k = 0;
  double value = 0;
  friend bool operator==(const HistoryPoint&, const HistoryPoint&) = default;
};

struct SolveTrace {
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<HistoryPoint> error_history;     // ||x^k - x*||_2
  std::vector<HistoryPoint> residual_history;  // ||A x^k - b||_2
  double wall_time = 0;                        // seconds, solve loop only
  Vector final_x;
  ResidualMode mode_used = ResidualMode::maintained;
};

// ---------------------------------------------------------------------------
// kernel pieces

namespace detail {

inline bool is_contiguous(const IndexSet& s) {
  return !s.empty() && s.back() - s.front() + 1 == s.size();
}

// delta = scale * A_{I,J}^T rI
inline void block_direction(const DenseMatrix& A, const IndexSet& I, const IndexSet& J,
                            std::span<const double> rI, double scale, std::span<double> delta) {
  std::fill(delta.begin(), delta.end(), 0.0);
  const bool contig = is_contiguous(J);
  for (std::size_t a = 0; a < I.size(); ++a) {
    const double ra = rI[a];
    if (ra == 0.0) continue;
    const auto row = A.row(I[a]);
    if (contig) {
      const double* src = row.data() + J.front();
      for (std::size_t c = 0; c < J.size(); ++c) delta[c] += src[c] * ra;
    } else {
      for (std::size_t c = 0; c < J.size(); ++c) delta[c] += row[J[c]] * ra;
    }
  }
  for (double& d : delta) d *= scale;
}

// r += A_{:,J} delta
inline void residual_update(const DenseMatrix& A, const IndexSet& J, std::span<const double> delta,
                            std::span<double> r) {
  const bool contig = is_contiguous(J);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto row = A.row(i);
    double s = 0;
    if (contig) {
      const double* src = row.data() + J.front();
      for (std::size_t c = 0; c < J.size(); ++c) s += src[c] * delta[c];
    } else {
      for (std::size_t c = 0; c < J.size(); ++c) s += row[J[c]] * delta[c];
    }
    r[i] += s;
  }
}

inline double block_frob_sq(const DenseMatrix& A, const IndexSet& I, const IndexSet& J) {
  double f = 0;
  for (std::size_t i : I)
    for (std::size_t j : J) f += A(i, j) * A(i, j);
  return f;
}

}  // namespace detail

/// Full-length update x^k - x^{k-1} for block (I, J) taken from iterate x.
inline Vector block_update(const LinearSystem& sys, const BlockPartition& part, BlockIndex blk,
                           double alpha, std::span<const double> x) {
  check_conforms(sys.A, part);
  const IndexSet& I = part.row_block(blk.row);
  const IndexSet& J = part.col_block(blk.col);
  const double f = detail::block_frob_sq(sys.A, I, J);
  if (f == 0.0) throw std::invalid_argument("block_update: selected block is all zero");
  Vector rI(I.size());
  for (std::size_t a = 0; a < I.size(); ++a) rI[a] = dot(sys.A.row(I[a]), x) - sys.b[I[a]];
  Vector delta(J.size());
  detail::block_direction(sys.A, I, J, rI, -alpha / f, delta);
  Vector full(sys.cols(), 0.0);
  for (std::size_t c = 0; c < J.size(); ++c) full[J[c]] = delta[c];
  return full;
}

/// One step on a state with a valid cached residual. Touches x only on J.
inline void dsbgs_step(IterateState& state, const LinearSystem& sys, const BlockPartition& part,
                       BlockIndex blk, double alpha) {
  check_conforms(sys.A, part);
  const IndexSet& I = part.row_block(blk.row);
  const IndexSet& J = part.col_block(blk.col);
  const double f = detail::block_frob_sq(sys.A, I, J);
  if (f == 0.0) throw std::invalid_argument("dsbgs_step: selected block is all zero");
  Vector rI(I.size());
  for (std::size_t a = 0; a < I.size(); ++a) rI[a] = state.r[I[a]];
  Vector delta(J.size());
  detail::block_direction(sys.A, I, J, rI, -alpha / f, delta);
  for (std::size_t c = 0; c < J.size(); ++c) state.x[J[c]] += delta[c];
  detail::residual_update(sys.A, J, delta, state.r);
  ++state.k;
}

// ---------------------------------------------------------------------------
// objective view

/// f(x) = ||b - Ax||^2 / (2 ||A||_F^2)
inline double objective(const LinearSystem& sys, std::span<const double> x) {
  return norm2_sq(subtract(matvec(sys.A, x), sys.b)) / (2.0 * frobenius_norm_sq(sys.A));
}

/// grad f(x) = A^T (Ax - b) / ||A||_F^2
inline Vector gradient(const LinearSystem& sys, std::span<const double> x) {
  Vector g = matvec_transpose(sys.A, subtract(matvec(sys.A, x), sys.b));
  const double f = frobenius_norm_sq(sys.A);
  for (double& v : g) v /= f;
  return g;
}

/// E[x^k] from x0: k steps of x <- x - alpha grad f(x).
inline Vector expected_iterate_recursion(const LinearSystem& sys, std::span<const double> x0,
                                         double alpha, std::size_t k) {
  Vector x(x0.begin(), x0.end());
  if (x.size() != sys.cols()) throw std::invalid_argument("expected_iterate_recursion: x0 length");
  for (std::size_t it = 0; it < k; ++it) {
    const Vector g = gradient(sys, x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= alpha * g[i];
  }
  return x;
}

// ---------------------------------------------------------------------------
// presets

enum class PresetKind { landweber, rk, rgs, dsgs };

struct Preset {
  std::size_t s = 1;
  std::size_t t = 1;
  std::size_t ell = 1;  // row block size giving s
  std::size_t tau = 1;  // column block size giving t
  std::string alpha_note;
};

inline Preset preset(PresetKind kind, std::size_t m, std::size_t n) {
  switch (kind) {
    case PresetKind::landweber:
      return {1, 1, m, n, "any alpha in (0, 2||A||_F^2/sigma_1^2) converges in expectation"};
    case PresetKind::rk:
      return {m, 1, 1, n, "alpha = 1 (classical randomized Kaczmarz)"};
    case PresetKind::rgs:
      return {1, n, m, 1, "alpha = sigma_r^2/||A||_F^2 for the residual bound"};
    case PresetKind::dsgs:
      return {m, n, 1, 1, "alpha = 1/n for the error bound, sigma_r^2/||A||_F^2 for the residual bound"};
  }
  throw std::invalid_argument("preset: unknown kind");
}

inline std::optional<PresetKind> parse_preset(const std::string& name) {
  if (name == "landweber") return PresetKind::landweber;
  if (name == "rk") return PresetKind::rk;
  if (name == "rgs") return PresetKind::rgs;
  if (name == "dsgs") return PresetKind::dsgs;
  return std::nullopt;
}

/// 1.0 when it lies inside (0, 2/(t beta)), otherwise the interval midpoint 1/(t beta).
inline double default_alpha(std::size_t t, double beta) {
  const double bound = 2.0 / (static_cast<double>(t) * beta);
  return 1.0 < bound ? 1.0 : 0.5 * bound;
}

/// Picks the cheaper way of producing r_I for this partition.
inline ResidualMode choose_residual_mode(const BlockPartition& part) {
  const double avg_rows = static_cast<double>(part.rows()) / static_cast<double>(part.s());
  const double avg_cols = static_cast<double>(part.cols()) / static_cast<double>(part.t());
  const double maintained = static_cast<double>(part.rows()) * avg_cols;
  const double on_demand = avg_rows * static_cast<double>(part.cols());
  return maintained <= on_demand ? ResidualMode::maintained : ResidualMode::on_demand;
}

// ---------------------------------------------------------------------------
// solve loop

inline constexpr std::size_t kResidualRefreshPeriod = 10'000;
inline constexpr std::size_t kErrorRefreshPeriod = 1'000;

/// Runs the iteration until the stop rule fires or max_iters steps are taken.
/// target is the point the error is measured against (normally x0_star from
/// the oracle); it is required for StopRule::error_to_pinv.
inline SolveTrace solve(const LinearSystem& sys, const BlockPartition& part,
                        const BlockDistribution& dist, const SolverConfig& cfg,
                        const OracleSolution* oracle = nullptr) {
  check_conforms(sys.A, part);
  if (!(cfg.alpha > 0)) throw std::invalid_argument("solve: alpha must be positive");
  if (!(cfg.tol > 0)) throw std::invalid_argument("solve: tol must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");
  if (cfg.stop_rule == StopRule::error_to_pinv && oracle == nullptr)
    throw std::invalid_argument("solve: error_to_pinv stop rule needs an oracle solution");
  if (oracle && oracle->x0_star.size() != sys.cols())
    throw std::invalid_argument("solve: oracle dimension mismatch");

  ResidualMode mode = cfg.residual_mode;
  if (cfg.stop_rule == StopRule::residual_norm) mode = ResidualMode::maintained;
  if (mode == ResidualMode::automatic) mode = choose_residual_mode(part);
  const bool maintained = mode == ResidualMode::maintained;

  const DenseMatrix& A = sys.A;
  const std::size_t n = sys.cols();
  const double* target = oracle ? oracle->x0_star.data() : nullptr;

  IterateState st;
  if (cfg.x0.empty()) st.x.assign(n, 0.0);
  else if (cfg.x0.size() != n) throw std::invalid_argument("solve: x0 length mismatch");
  else st.x = cfg.x0;
  st.r = subtract(matvec(A, st.x), sys.b);

  auto exact_err2 = [&] {
    double e = 0;
    for (std::size_t i = 0; i < n; ++i) e += (st.x[i] - target[i]) * (st.x[i] - target[i]);
    return e;
  };
  auto residual_norm = [&] {
    if (maintained) return norm2(st.r);
    return norm2(subtract(matvec(A, st.x), sys.b));
  };

  SolveTrace trace;
  trace.mode_used = mode;
  const std::size_t stride = cfg.history_stride;
  auto record = [&] {
    if (stride == 0) return;
    if (!trace.residual_history.empty() && trace.residual_history.back().k == st.k) return;
    if (target) trace.error_history.push_back({st.k, std::sqrt(exact_err2())});
    trace.residual_history.push_back({st.k, residual_norm()});
  };

  double err2 = target ? exact_err2() : 0.0;
  const double tol2 = cfg.tol * cfg.tol;

  auto stop_now = [&]() -> bool {
    switch (cfg.stop_rule) {
      case StopRule::error_to_pinv:
        if (err2 > tol2) return false;
        err2 = exact_err2();  // confirm against accumulated drift
        return err2 <= tol2;
      case StopRule::residual_norm:
        return norm2(st.r) <= cfg.tol;
      case StopRule::iteration_cap:
        return false;
    }
    return false;
  };

  BlockSampler sampler(dist, cfg.seed);
  Vector rI;
  Vector delta;
  record();
  const auto t0 = std::chrono::steady_clock::now();
  bool converged = stop_now();
  while (!converged && st.k < cfg.max_iters) {
    const BlockIndex blk = sampler();
    const IndexSet& I = part.row_block(blk.row);
    const IndexSet& J = part.col_block(blk.col);
    const double f = dist.frob_sq(blk);

    rI.resize(I.size());
    if (maintained) {
      for (std::size_t a = 0; a < I.size(); ++a) rI[a] = st.r[I[a]];
    } else {
      for (std::size_t a = 0; a < I.size(); ++a) rI[a] = dot(A.row(I[a]), st.x) - sys.b[I[a]];
    }
    delta.resize(J.size());
    detail::block_direction(A, I, J, rI, -cfg.alpha / f, delta);

    if (target) {
      double change = 0;
      for (std::size_t c = 0; c < J.size(); ++c) {
        const std::size_t j = J[c];
        const double before = st.x[j] - target[j];
        const double after = before + delta[c];
        change += after * after - before * before;
        st.x[j] += delta[c];
      }
      err2 += change;
    } else {
      for (std::size_t c = 0; c < J.size(); ++c) st.x[J[c]] += delta[c];
    }
    if (maintained) detail::residual_update(A, J, delta, st.r);
    ++st.k;

    if (maintained && st.k % kResidualRefreshPeriod == 0) st.refresh_residual(sys);
    if (target && st.k % kErrorRefreshPeriod == 0) err2 = exact_err2();
    if (!std::isfinite(err2) || !std::isfinite(st.x[J.front()])) break;  // diverged

    if (stride != 0 && st.k % stride == 0) record();
    converged = stop_now();
  }
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record();

  trace.iterations = st.k;
  trace.converged = converged;
  trace.final_x = std::move(st.x);
  return trace;
}

/// Convenience overload that builds the distribution itself.
inline SolveTrace solve(const LinearSystem& sys, const BlockPartition& part,
                        const SolverConfig& cfg, const OracleSolution* oracle = nullptr) {
  const BlockDistribution dist = build_distribution(sys.A, part);
  return solve(sys, part, dist, cfg, oracle);
}

}  // namespace dsbgs
