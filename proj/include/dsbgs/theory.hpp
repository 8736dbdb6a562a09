#pragma once

// Closed-form contraction factors and admissible step-size intervals.
//
// Rates are always computed, even when a hypothesis fails; the accompanying
// flags say whether the bound is actually guaranteed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>

#include "dsbgs/linalg.hpp"

namespace dsbgs {

/// Open interval (0, upper).
struct StepInterval {
  double upper = 0;
  bool contains(double alpha) const noexcept { return alpha > 0 && alpha < upper; }
};

struct Rate {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool applicable = true;  // structural hypothesis (rank, t vs n) holds
  bool alpha_ok = false;   // alpha inside the sufficient interval
  bool guaranteed() const noexcept { return applicable && alpha_ok; }
};

/// max_i |1 - alpha sigma_i^2 / ||A||_F^2| over the nonzero singular values.
inline double expected_norm_rate(const SpectralInfo& info, double alpha) {
  double rate = 0;
  for (double s : info.singular_values)
    rate = std::max(rate, std::abs(1.0 - alpha * s * s / info.frob_sq));
  return rate;
}

/// 1 - (2 alpha - t beta alpha^2) sigma_n^2 / ||A||_F^2; applicable only at full column rank.
inline Rate error_decay_rate(const SpectralInfo& info, double alpha, std::size_t t, double beta) {
  const double td = static_cast<double>(t);
  const double sn2 = info.sigma_min_pos * info.sigma_min_pos;
  Rate r;
  r.value = 1.0 - (2.0 * alpha - td * beta * alpha * alpha) * sn2 / info.frob_sq;
  r.applicable = info.rank == info.cols;
  r.alpha_ok = alpha > 0 && alpha < 2.0 / (td * beta);
  return r;
}

/// Rank-deficient variant for t = 1 and any s, measured against x0_star:
/// 1 - (2 alpha - beta alpha^2) sigma_r^2 / ||A||_F^2.
inline Rate error_decay_rate_rank_deficient(const SpectralInfo& info, double alpha, std::size_t t,
                                            double beta) {
  const double sr2 = info.sigma_min_pos * info.sigma_min_pos;
  Rate r;
  r.value = 1.0 - (2.0 * alpha - beta * alpha * alpha) * sr2 / info.frob_sq;
  r.applicable = t == 1;
  r.alpha_ok = alpha > 0 && alpha < 2.0 / beta;
  return r;
}

/// Residual contraction factor for single-column blocks (t = n):
/// 1 + beta alpha^2 - 2 alpha sigma_r^2 / ||A||_F^2.
inline Rate residual_rate_single_columns(const SpectralInfo& info, double alpha, double beta) {
  const double sr2 = info.sigma_min_pos * info.sigma_min_pos;
  Rate r;
  r.value = 1.0 + beta * alpha * alpha - 2.0 * alpha * sr2 / info.frob_sq;
  r.alpha_ok = alpha > 0 && alpha < 2.0 * sr2 / (beta * info.frob_sq);
  return r;
}

/// Residual contraction factor for wider column blocks (t < n):
/// 1 - (2 alpha sigma_r^2 - t rho beta alpha^2) / ||A||_F^2.
inline Rate residual_rate_column_blocks(const SpectralInfo& info, double alpha, std::size_t t,
                                        double beta, double rho) {
  const double sr2 = info.sigma_min_pos * info.sigma_min_pos;
  const double td = static_cast<double>(t);
  Rate r;
  r.value = 1.0 - (2.0 * alpha * sr2 - td * rho * beta * alpha * alpha) / info.frob_sq;
  r.alpha_ok = alpha > 0 && alpha < 2.0 * sr2 / (td * rho * beta);
  return r;
}

/// Residual contraction factor, branch chosen by whether t equals n.
inline Rate residual_decay_rate(const SpectralInfo& info, double alpha, std::size_t t,
                                std::size_t n, double beta, double rho) {
  Rate r = t == n ? residual_rate_single_columns(info, alpha, beta)
                  : residual_rate_column_blocks(info, alpha, t, beta, rho);
  r.applicable = t <= n;
  return r;
}

struct AdmissibleIntervals {
  StepInterval expected;        // (0, 2||A||_F^2 / sigma_1^2)
  StepInterval error;           // (0, 2/(t beta))
  StepInterval residual_t_eq_n; // (0, 2 sigma_r^2 / (beta ||A||_F^2))
  StepInterval residual_t_lt_n; // (0, 2 sigma_r^2 / (t rho beta))
};

inline AdmissibleIntervals admissible_intervals(const SpectralInfo& info, std::size_t t,
                                                double beta, double rho) {
  const double td = static_cast<double>(t);
  const double sr2 = info.sigma_min_pos * info.sigma_min_pos;
  AdmissibleIntervals iv;
  iv.expected.upper = 2.0 * info.frob_sq / (info.sigma_max * info.sigma_max);
  iv.error.upper = 2.0 / (td * beta);
  iv.residual_t_eq_n.upper = 2.0 * sr2 / (beta * info.frob_sq);
  iv.residual_t_lt_n.upper = 2.0 * sr2 / (td * rho * beta);
  return iv;
}

struct TheoryReport {
  SpectralInfo info;
  std::size_t s = 0;
  std::size_t t = 0;
  double alpha = 0;
  double beta = 0;
  double rho = 0;
  double expected_iterate_rate = 0;
  bool expected_alpha_ok = false;
  Rate error_rate_thm3;
  Rate error_rate_rankdef_t1;
  Rate residual_rate;  // branch chosen by t == n
  Rate residual_rate_teq_n;
  Rate residual_rate_tlt_n;
  AdmissibleIntervals intervals;
};

inline TheoryReport theory_report(const SpectralInfo& info, std::size_t s, std::size_t t,
                                  double beta, double rho, double alpha) {
  TheoryReport rep;
  rep.info = info;
  rep.s = s;
  rep.t = t;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.rho = rho;
  rep.intervals = admissible_intervals(info, t, beta, rho);
  rep.expected_iterate_rate = expected_norm_rate(info, alpha);
  rep.expected_alpha_ok = rep.intervals.expected.contains(alpha);
  rep.error_rate_thm3 = error_decay_rate(info, alpha, t, beta);
  rep.error_rate_rankdef_t1 = error_decay_rate_rank_deficient(info, alpha, t, beta);
  const std::size_t n = info.cols;
  rep.residual_rate_teq_n = residual_rate_single_columns(info, alpha, beta);
  rep.residual_rate_teq_n.applicable = t == n;
  rep.residual_rate_tlt_n = residual_rate_column_blocks(info, alpha, t, beta, rho);
  rep.residual_rate_tlt_n.applicable = t < n;
  rep.residual_rate = t == n ? rep.residual_rate_teq_n : rep.residual_rate_tlt_n;
  return rep;
}

namespace detail {
inline const char* verdict(const Rate& r) {
  if (!r.applicable) return "not applicable";
  return r.alpha_ok ? "guaranteed" : "hypothesis violated: alpha outside interval";
}
}  // namespace detail

inline std::ostream& operator<<(std::ostream& os, const TheoryReport& rep) {
  const auto& i = rep.info;
  os << "matrix            " << i.rows << " x " << i.cols << "\n"
     << "sigma_1           " << i.sigma_max << "\n"
     << "sigma_r           " << i.sigma_min_pos << "\n"
     << "rank              " << i.rank << (i.rank == i.cols ? " (full column rank)" : " (rank deficient)") << "\n"
     << "cond              " << i.cond << "\n"
     << "||A||_F^2         " << i.frob_sq << "\n"
     << "partition (s, t)  (" << rep.s << ", " << rep.t << ")\n"
     << "beta              " << rep.beta << "\n"
     << "rho               " << rep.rho << "\n"
     << "alpha             " << rep.alpha << "\n\n";
  os << "expected-iterate rate      " << rep.expected_iterate_rate << "   alpha interval (0, "
     << rep.intervals.expected.upper << ")  "
     << (rep.expected_alpha_ok ? "guaranteed" : "hypothesis violated: alpha outside interval") << "\n";
  os << "error rate (full rank)     " << rep.error_rate_thm3.value << "   alpha interval (0, "
     << rep.intervals.error.upper << ")  " << detail::verdict(rep.error_rate_thm3) << "\n";
  os << "error rate (rank-def, t=1) " << rep.error_rate_rankdef_t1.value << "   alpha interval (0, "
     << 2.0 / rep.beta << ")  " << detail::verdict(rep.error_rate_rankdef_t1) << "\n";
  os << "residual rate (t = n)      " << rep.residual_rate_teq_n.value << "   alpha interval (0, "
     << rep.intervals.residual_t_eq_n.upper << ")  " << detail::verdict(rep.residual_rate_teq_n) << "\n";
  os << "residual rate (t < n)      " << rep.residual_rate_tlt_n.value << "   alpha interval (0, "
     << rep.intervals.residual_t_lt_n.upper << ")  " << detail::verdict(rep.residual_rate_tlt_n) << "\n";
  if (!rep.error_rate_thm3.alpha_ok)
    os << "note: alpha exceeds the full-rank error bound's sufficient interval (0, "
       << rep.intervals.error.upper << "); convergence is still possible but not guaranteed\n";
  return os;
}

}  // namespace dsbgs
