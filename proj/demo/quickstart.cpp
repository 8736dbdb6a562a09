// Solve a random overdetermined system with randomized Kaczmarz and with a
// blocked variant, and print the theoretical rate next to the observed count.

#include <iostream>

#include "dsbgs/dsbgs.hpp"

int main() {
  using namespace dsbgs;

  const GeneratedProblem p = gen_type2(400, 200, 42);
  const LinearSystem& sys = p.system;
  const OracleSolution oracle = pinv_solve(sys.A, sys.b);
  const SpectralInfo info = spectral_info(sys.A);

  struct Run {
    const char* name;
    std::size_t ell, tau;
    double alpha;
  };
  for (const Run& r : {Run{"RK", 1, 200, 1.0}, Run{"DSBGS(10,40,40)", 40, 40, 10.0}}) {
    const auto part = BlockPartition::uniform(sys.rows(), sys.cols(), r.ell, r.tau);
    const auto c = compute_constants(sys.A, part);

    SolverConfig cfg;
    cfg.alpha = r.alpha;
    cfg.seed = 7;
    cfg.history_stride = 0;
    const SolveTrace tr = solve(sys, part, cfg, &oracle);

    const Rate rate = error_decay_rate(info, r.alpha, part.t(), c.beta);
    std::cout << r.name << ": " << tr.iterations << " iterations, " << tr.wall_time << " s, "
              << "beta = " << c.beta << ", bound rate = " << rate.value
              << (rate.alpha_ok ? "" : " (alpha beyond the sufficient interval)") << "\n";
  }
}
