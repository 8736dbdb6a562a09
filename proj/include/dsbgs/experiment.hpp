#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dsbgs {

struct TrialOutcome {
  std::size_t iterations = 0;
  double seconds = 0;
  bool converged = false;
};

/// Aggregated outcome of one method over all trials of an experiment.
/// Means cover converged trials only; per_trial keeps every trial.
struct ExperimentResult {
  std::string matrix;  // problem label
  std::size_t m = 0;
  std::size_t n = 0;
  std::string label;   // method label
  double alpha = 0;
  std::size_t ell = 0;
  std::size_t tau = 0;
  double iter_mean = 0;
  double cpu_mean = 0;
  double speedup_vs_baseline = 0;
  std::vector<TrialOutcome> per_trial;

  std::size_t converged_trials() const {
    std::size_t c = 0;
    for (const auto& t : per_trial) c += t.converged ? 1 : 0;
    return c;
  }
};

}  // namespace dsbgs
