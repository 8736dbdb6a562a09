#pragma once

// Multi-trial experiment harness.
//
// Each trial t uses seed base_seed + t for its problem (synthetic specs draw a
// fresh matrix per trial) and mix_seed(base_seed + t, method) for the block
// sampler of each method, so every trial is reproducible on its own.
// Problem preparation (generation, oracle, distributions) may run on worker
// threads; the timed solves always run one at a time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "dsbgs/experiment.hpp"
#include "dsbgs/io.hpp"
#include "dsbgs/linalg.hpp"
#include "dsbgs/partition.hpp"
#include "dsbgs/probgen.hpp"
#include "dsbgs/solver.hpp"
#include "dsbgs/theory.hpp"

namespace dsbgs {

/// Wall-clock seconds spent in f().
template <class F>
double time_seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  std::forward<F>(f)();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct MatrixMarketSource {
  std::string path;
};

using ProblemSpec = std::variant<Type1Params, Type2Params, MatrixMarketSource>;

/// ell / tau of 0 mean "whole dimension" (a single block).
struct MethodSpec {
  std::string label;
  double alpha = 1.0;
  std::size_t ell = 1;
  std::size_t tau = 0;
};

struct ExperimentSpec {
  ProblemSpec problem;
  std::vector<MethodSpec> methods;  // first one is the speed-up baseline
  std::size_t trials = 20;
  double stop_tol = 1e-5;
  std::size_t max_iters = 5'000'000;
  std::uint64_t base_seed = 1;
  bool parallel = true;
  std::size_t history_stride = 0;  // > 0 collects mean error histories
};

struct ExperimentOutcome {
  std::vector<ExperimentResult> results;
  std::vector<std::string> warnings;
  std::vector<std::vector<HistoryRow>> mean_histories;  // per method, when requested
  bool any_converged = false;
};

inline std::size_t resolve_block(std::size_t size, std::size_t dim) { return size == 0 ? dim : size; }

inline std::string problem_label(const ProblemSpec& p) {
  struct V {
    std::string operator()(const Type1Params& q) const {
      std::ostringstream os;
      os << "type1(" << q.m << "x" << q.n << ",r=" << q.rank << ",kappa=" << q.kappa << ")";
      return os.str();
    }
    std::string operator()(const Type2Params& q) const {
      return "type2(" + std::to_string(q.m) + "x" + std::to_string(q.n) + ")";
    }
    std::string operator()(const MatrixMarketSource& s) const {
      auto slash = s.path.find_last_of('/');
      std::string base = slash == std::string::npos ? s.path : s.path.substr(slash + 1);
      if (auto dot = base.rfind(".mtx"); dot != std::string::npos) base.resize(dot);
      return base;
    }
  };
  return std::visit(V{}, p);
}

namespace detail {

struct PreparedTrial {
  LinearSystem system;
  OracleSolution oracle;
  std::vector<BlockPartition> partitions;
  std::vector<BlockDistribution> distributions;
};

inline PreparedTrial prepare_trial(const ExperimentSpec& spec, const DenseMatrix* fixed_matrix,
                                   std::size_t trial) {
  const std::uint64_t seed = spec.base_seed + trial;
  LinearSystem sys;
  if (const auto* p1 = std::get_if<Type1Params>(&spec.problem))
    sys = gen_type1(p1->m, p1->n, p1->rank, p1->kappa, seed).system;
  else if (const auto* p2 = std::get_if<Type2Params>(&spec.problem))
    sys = gen_type2(p2->m, p2->n, seed).system;
  else
    sys = consistent_system(*fixed_matrix, spec.base_seed);

  OracleSolution oracle = pinv_solve(sys.A, sys.b);
  std::vector<BlockPartition> parts;
  std::vector<BlockDistribution> dists;
  for (const auto& m : spec.methods) {
    parts.push_back(BlockPartition::uniform(sys.rows(), sys.cols(), resolve_block(m.ell, sys.rows()),
                                            resolve_block(m.tau, sys.cols())));
    dists.push_back(build_distribution(sys.A, parts.back()));
  }
  return {std::move(sys), std::move(oracle), std::move(parts), std::move(dists)};
}

}  // namespace detail

inline void validate(const ExperimentSpec& spec, std::size_t m, std::size_t n) {
  if (spec.trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (spec.methods.empty()) throw std::invalid_argument("experiment: no methods");
  if (!(spec.stop_tol > 0)) throw std::invalid_argument("experiment: tol must be positive");
  for (const auto& mth : spec.methods) {
    if (!(mth.alpha > 0)) throw std::invalid_argument("method " + mth.label + ": alpha must be positive");
    if (resolve_block(mth.ell, m) > m)
      throw std::invalid_argument("method " + mth.label + ": ell exceeds m = " + std::to_string(m));
    if (resolve_block(mth.tau, n) > n)
      throw std::invalid_argument("method " + mth.label + ": tau exceeds n = " + std::to_string(n));
  }
}

inline ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  std::optional<DenseMatrix> fixed;
  std::size_t m = 0, n = 0;
  if (const auto* p1 = std::get_if<Type1Params>(&spec.problem)) {
    m = p1->m;
    n = p1->n;
  } else if (const auto* p2 = std::get_if<Type2Params>(&spec.problem)) {
    m = p2->m;
    n = p2->n;
  } else {
    fixed = read_matrix_market(std::get<MatrixMarketSource>(spec.problem).path);
    m = fixed->rows();
    n = fixed->cols();
  }
  validate(spec, m, n);

  const std::size_t nm = spec.methods.size();
  ExperimentOutcome out;
  const std::string label = problem_label(spec.problem);
  for (const auto& mth : spec.methods) {
    ExperimentResult r;
    r.matrix = label;
    r.m = m;
    r.n = n;
    r.label = mth.label;
    r.alpha = mth.alpha;
    r.ell = resolve_block(mth.ell, m);
    r.tau = resolve_block(mth.tau, n);
    out.results.push_back(std::move(r));
  }
  std::vector<std::map<std::size_t, std::pair<double, std::size_t>>> err_acc(nm), res_acc(nm);

  const std::size_t workers =
      spec.parallel ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : 1;
  const DenseMatrix* fixed_ptr = fixed ? &*fixed : nullptr;

  for (std::size_t base = 0; base < spec.trials; base += workers) {
    const std::size_t count = std::min(workers, spec.trials - base);
    std::vector<detail::PreparedTrial> prepared;
    if (count > 1) {
      std::vector<std::future<detail::PreparedTrial>> futs;
      for (std::size_t w = 0; w < count; ++w)
        futs.push_back(std::async(std::launch::async, detail::prepare_trial, std::cref(spec),
                                  fixed_ptr, base + w));
      for (auto& f : futs) prepared.push_back(f.get());
    } else {
      prepared.push_back(detail::prepare_trial(spec, fixed_ptr, base));
    }

    for (std::size_t w = 0; w < count; ++w) {
      const std::size_t trial = base + w;
      const auto& prep = prepared[w];
      for (std::size_t k = 0; k < nm; ++k) {
        SolverConfig cfg;
        cfg.alpha = spec.methods[k].alpha;
        cfg.seed = mix_seed(spec.base_seed + trial, k);
        cfg.max_iters = spec.max_iters;
        cfg.tol = spec.stop_tol;
        cfg.stop_rule = StopRule::error_to_pinv;
        cfg.history_stride = spec.history_stride;
        const SolveTrace tr = solve(prep.system, prep.partitions[k], prep.distributions[k], cfg, &prep.oracle);
        out.results[k].per_trial.push_back({tr.iterations, tr.wall_time, tr.converged});
        out.any_converged = out.any_converged || tr.converged;
        if (!tr.converged)
          out.warnings.push_back("method " + spec.methods[k].label + " trial " + std::to_string(trial) +
                                 " did not converge within " + std::to_string(spec.max_iters) +
                                 " iterations; excluded from means");
        for (const auto& p : tr.error_history) {
          auto& slot = err_acc[k][p.k];
          slot.first += p.value;
          ++slot.second;
        }
        for (const auto& p : tr.residual_history) {
          auto& slot = res_acc[k][p.k];
          slot.first += p.value;
          ++slot.second;
        }
      }
    }
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& r : out.results) {
    double it = 0, cpu = 0;
    std::size_t c = 0;
    for (const auto& t : r.per_trial)
      if (t.converged) {
        it += static_cast<double>(t.iterations);
        cpu += t.seconds;
        ++c;
      }
    r.iter_mean = c ? it / static_cast<double>(c) : nan;
    r.cpu_mean = c ? cpu / static_cast<double>(c) : nan;
    if (c == 0) out.warnings.push_back("method " + r.label + ": no trial converged");
  }
  const double base_cpu = out.results.front().cpu_mean;
  for (auto& r : out.results) r.speedup_vs_baseline = base_cpu / r.cpu_mean;

  if (spec.history_stride > 0) {
    for (std::size_t k = 0; k < nm; ++k) {
      std::vector<HistoryRow> rows;
      for (const auto& [kk, acc] : res_acc[k]) {
        HistoryRow row{kk, nan, acc.first / static_cast<double>(acc.second)};
        if (auto it = err_acc[k].find(kk); it != err_acc[k].end())
          row.error_norm = it->second.first / static_cast<double>(it->second.second);
        rows.push_back(row);
      }
      out.mean_histories.push_back(std::move(rows));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// theory report for a concrete problem and block shape

inline TheoryReport build_theory_report(const DenseMatrix& A, std::size_t ell, std::size_t tau,
                                        double alpha) {
  const auto part = BlockPartition::uniform(A.rows(), A.cols(), resolve_block(ell, A.rows()),
                                            resolve_block(tau, A.cols()));
  const SpectralInfo info = spectral_info(A);
  const PartitionConstants c = compute_constants(A, part);
  return theory_report(info, part.s(), part.t(), c.beta, c.rho, alpha);
}

/// Non-empty when alpha lies beyond the sufficient interval of the error bound.
inline std::string alpha_warning(const TheoryReport& rep) {
  if (rep.intervals.error.contains(rep.alpha)) return {};
  std::ostringstream os;
  os << "alpha = " << rep.alpha << " exceeds the sufficient error-bound interval (0, "
     << rep.intervals.error.upper << "); convergence is not guaranteed but may still occur";
  return os.str();
}

}  // namespace dsbgs
