// Command-line front end: solve, bench, theory, gen.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dsbgs/dsbgs.hpp"

namespace {

using namespace dsbgs;
using json = nlohmann::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::size_t, std::size_t> parse_dims(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const std::string ms = s.substr(0, x), ns = s.substr(x + 1);
    const auto m = std::stoull(ms, &used);
    if (used != ms.size()) throw std::invalid_argument(s);
    const auto n = std::stoull(ns, &used);
    if (used != ns.size() || m == 0 || n == 0) throw std::invalid_argument(s);
    return {m, n};
  } catch (const std::logic_error&) {
    throw InputError("dimensions must look like MxN, got '" + s + "'");
  }
}

/// Options shared by every subcommand that needs a problem.
struct ProblemOpts {
  std::string matrix, rhs, type1, type2;
  std::size_t rank = 0;
  double kappa = 2.0;

  void add(CLI::App* app) {
    app->add_option("--matrix", matrix, "Matrix Market file for A");
    app->add_option("--rhs", rhs, "Matrix Market array file for b (default: b = A x, x ~ N(0, I))");
    app->add_option("--type1", type1, "Type I synthetic problem MxN (U D V^T)");
    app->add_option("--type2", type2, "Type II synthetic problem MxN (Gaussian entries)");
    app->add_option("--rank", rank, "rank for --type1 (default min(m, n))");
    app->add_option("--kappa", kappa, "condition bound for --type1")->capture_default_str();
  }

  void check() const {
    const int given = !matrix.empty() + !type1.empty() + !type2.empty();
    if (given != 1) throw InputError("give exactly one of --matrix, --type1, --type2");
    if (!rhs.empty() && matrix.empty()) throw InputError("--rhs needs --matrix");
  }

  ProblemSpec spec() const {
    check();
    if (!matrix.empty()) return MatrixMarketSource{matrix};
    if (!type1.empty()) {
      const auto [m, n] = parse_dims(type1);
      return Type1Params{m, n, rank ? rank : std::min(m, n), kappa};
    }
    const auto [m, n] = parse_dims(type2);
    return Type2Params{m, n};
  }

  LinearSystem load(std::uint64_t seed, Vector* x_true = nullptr) const {
    const ProblemSpec p = spec();
    if (const auto* t1 = std::get_if<Type1Params>(&p)) {
      auto g = gen_type1(t1->m, t1->n, t1->rank, t1->kappa, seed);
      if (x_true) *x_true = g.x_true;
      return std::move(g.system);
    }
    if (const auto* t2 = std::get_if<Type2Params>(&p)) {
      auto g = gen_type2(t2->m, t2->n, seed);
      if (x_true) *x_true = g.x_true;
      return std::move(g.system);
    }
    DenseMatrix A = read_matrix_market(matrix);
    if (rhs.empty()) return consistent_system(std::move(A), seed);
    Vector b = read_vector_market(rhs);
    if (b.size() != A.rows())
      throw InputError("--rhs has " + std::to_string(b.size()) + " entries but A has " +
                       std::to_string(A.rows()) + " rows");
    return LinearSystem(std::move(A), std::move(b));
  }
};

/// Step size and block shape; --preset fills ell/tau unless they are given.
struct MethodOpts {
  std::optional<double> alpha;
  std::optional<std::size_t> ell, tau;
  std::string preset_name;

  void add(CLI::App* app) {
    app->add_option("--alpha", alpha, "step size (default: 1 if inside (0, 2/(t beta)), else 1/(t beta))");
    app->add_option("--ell", ell, "row block size (0 = all rows)");
    app->add_option("--tau", tau, "column block size (0 = all columns)");
    app->add_option("--preset", preset_name, "landweber, rk, rgs or dsgs")
        ->check(CLI::IsMember({"landweber", "rk", "rgs", "dsgs"}));
  }

  std::pair<std::size_t, std::size_t> shape(std::size_t m, std::size_t n) const {
    std::size_t l = 1, t = n;
    if (!preset_name.empty()) {
      const Preset p = preset(*parse_preset(preset_name), m, n);
      l = p.ell;
      t = p.tau;
    }
    if (ell) l = resolve_block(*ell, m);
    if (tau) t = resolve_block(*tau, n);
    if (l > m) throw InputError("--ell " + std::to_string(l) + " exceeds m = " + std::to_string(m));
    if (t > n) throw InputError("--tau " + std::to_string(t) + " exceeds n = " + std::to_string(n));
    return {l, t};
  }
};

void warn(const std::string& msg) {
  if (!msg.empty()) std::cerr << "warning: " << msg << "\n";
}

std::string block_label(std::size_t ell, std::size_t tau, std::size_t m, std::size_t n) {
  auto side = [](std::size_t v, std::size_t dim, const char* name) {
    return v == dim ? std::string(name) : std::to_string(v);
  };
  return side(ell, m, "m") + "," + side(tau, n, "n");
}

// ---------------------------------------------------------------------------

struct SolveCmd {
  ProblemOpts problem;
  MethodOpts method;
  double tol = 1e-5;
  std::size_t max_iters = 1'000'000;
  std::uint64_t seed = 1;
  std::string out, stop = "error";
  std::size_t stride = 10;

  int run() const {
    const LinearSystem sys = problem.load(seed);
    const auto [ell, tau] = method.shape(sys.rows(), sys.cols());
    const auto part = BlockPartition::uniform(sys.rows(), sys.cols(), ell, tau);
    const auto consts = compute_constants(sys.A, part);
    const double alpha = method.alpha.value_or(default_alpha(part.t(), consts.beta));
    if (!(alpha > 0)) throw InputError("--alpha must be positive");
    if (!(alpha < 2.0 / (static_cast<double>(part.t()) * consts.beta)))
      warn("alpha = " + std::to_string(alpha) + " exceeds the sufficient error-bound interval (0, " +
           std::to_string(2.0 / (static_cast<double>(part.t()) * consts.beta)) + ")");

    const OracleSolution oracle = pinv_solve(sys.A, sys.b);
    if (!oracle.consistent) warn("system is inconsistent; error is measured against A^+ b");
    SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.seed = mix_seed(seed, 0);
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    cfg.stop_rule = stop == "residual" ? StopRule::residual_norm : StopRule::error_to_pinv;
    cfg.history_stride = stride;
    const SolveTrace tr = solve(sys, part, cfg, &oracle);

    std::cout << "problem     " << sys.rows() << " x " << sys.cols() << ", rank " << oracle.rank << "\n"
              << "method      DSBGS(" << alpha << ", " << block_label(ell, tau, sys.rows(), sys.cols())
              << "), s = " << part.s() << ", t = " << part.t() << "\n"
              << "iterations  " << tr.iterations << (tr.converged ? " (converged)" : " (not converged)") << "\n"
              << "error       " << norm2(subtract(tr.final_x, oracle.x0_star)) << "\n"
              << "residual    " << norm2(subtract(matvec(sys.A, tr.final_x), sys.b)) << "\n"
              << "time        " << tr.wall_time << " s\n";
    if (!out.empty()) write_history_csv(tr, out);
    return tr.converged ? 0 : 2;
  }
};

// ---------------------------------------------------------------------------

std::size_t block_from_json(const json& v, const char* what) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "m" || s == "n" || s == "all") return 0;
    throw InputError(std::string("method ") + what + ": expected a count or \"m\"/\"n\", got '" + s + "'");
  }
  return v.get<std::size_t>();
}

ExperimentSpec spec_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  ExperimentSpec spec;
  try {
    const json& p = j.at("problem");
    const std::string type = p.value("type", p.contains("matrix") ? "matrix" : "");
    if (type == "type1")
      spec.problem = Type1Params{p.at("m"), p.at("n"), p.at("rank"), p.value("kappa", 2.0)};
    else if (type == "type2")
      spec.problem = Type2Params{p.at("m"), p.at("n")};
    else if (type == "matrix") {
      std::filesystem::path mp = p.at("matrix").get<std::string>();
      if (mp.is_relative()) mp = std::filesystem::path(path).parent_path() / mp;
      spec.problem = MatrixMarketSource{mp.string()};
    } else
      throw InputError(path + ": problem.type must be type1, type2 or matrix");
    for (const auto& m : j.at("methods"))
      spec.methods.push_back({m.at("label"), m.at("alpha"), block_from_json(m.value("ell", json(1)), "ell"),
                              block_from_json(m.value("tau", json("n")), "tau")});
    spec.trials = j.value("trials", spec.trials);
    spec.stop_tol = j.value("tol", spec.stop_tol);
    spec.max_iters = j.value("max_iters", spec.max_iters);
    spec.base_seed = j.value("seed", spec.base_seed);
    spec.history_stride = j.value("history_stride", spec.history_stride);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return spec;
}

MethodSpec parse_method_flag(const std::string& s) {
  // label:alpha[:ell[:tau]]
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() < 2 || parts.size() > 4 || parts[0].empty())
    throw InputError("--method expects label:alpha[:ell[:tau]], got '" + s + "'");
  auto count = [&](const std::string& v) -> std::size_t {
    if (v == "m" || v == "n") return 0;
    try {
      return std::stoull(v);
    } catch (const std::logic_error&) {
      throw InputError("--method '" + s + "': bad block size '" + v + "'");
    }
  };
  MethodSpec m;
  m.label = parts[0];
  try {
    m.alpha = std::stod(parts[1]);
  } catch (const std::logic_error&) {
    throw InputError("--method '" + s + "': bad alpha '" + parts[1] + "'");
  }
  if (parts.size() > 2) m.ell = count(parts[2]);
  if (parts.size() > 3) m.tau = count(parts[3]);
  return m;
}

struct BenchCmd {
  ProblemOpts problem;
  MethodOpts method;
  std::string config, out, history_dir;
  std::vector<std::string> method_flags;
  std::size_t trials = 20, max_iters = 5'000'000, history_stride = 0;
  double tol = 1e-5;
  std::uint64_t seed = 1;
  bool no_parallel = false;
  CLI::App* app = nullptr;

  bool given(const char* flag) const { return app->count(flag) > 0; }

  ExperimentSpec build_spec() const {
    ExperimentSpec spec;
    if (!config.empty()) {
      spec = spec_from_json(config);
    } else {
      spec.problem = problem.spec();
      if (!method_flags.empty()) {
        for (const auto& f : method_flags) spec.methods.push_back(parse_method_flag(f));
      } else {
        // RK baseline against one DSBGS configuration from --alpha/--ell/--tau/--preset
        std::size_t m = 0, n = 0;
        std::visit([&](const auto& p) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(p)>, MatrixMarketSource>) {
            m = p.m;
            n = p.n;
          }
        }, spec.problem);
        spec.methods.push_back({"RK", 1.0, 1, 0});
        MethodSpec d;
        d.alpha = method.alpha.value_or(1.0);
        if (m && n) {
          const auto [l, t] = method.shape(m, n);
          d.ell = l;
          d.tau = t;
        } else {
          d.ell = method.ell.value_or(1);
          d.tau = method.tau.value_or(0);
        }
        std::ostringstream lbl;
        lbl << "DSBGS(" << d.alpha << "," << (d.ell ? std::to_string(d.ell) : "m") << ","
            << (d.tau && d.tau != n ? std::to_string(d.tau) : "n") << ")";
        d.label = lbl.str();
        spec.methods.push_back(d);
      }
    }
    if (config.empty() || given("--trials")) spec.trials = trials;
    if (config.empty() || given("--tol")) spec.stop_tol = tol;
    if (config.empty() || given("--max-iters")) spec.max_iters = max_iters;
    if (config.empty() || given("--seed")) spec.base_seed = seed;
    if (config.empty() || given("--history-stride")) spec.history_stride = history_stride;
    if (!history_dir.empty() && spec.history_stride == 0) spec.history_stride = 100;
    spec.parallel = !no_parallel;
    return spec;
  }

  void alpha_warnings(const ExperimentSpec& spec) const {
    LinearSystem sys;
    if (const auto* t1 = std::get_if<Type1Params>(&spec.problem))
      sys = gen_type1(t1->m, t1->n, t1->rank, t1->kappa, spec.base_seed).system;
    else if (const auto* t2 = std::get_if<Type2Params>(&spec.problem))
      sys = gen_type2(t2->m, t2->n, spec.base_seed).system;
    else
      sys = consistent_system(read_matrix_market(std::get<MatrixMarketSource>(spec.problem).path), spec.base_seed);
    for (const auto& mth : spec.methods) {
      const std::size_t l = resolve_block(mth.ell, sys.rows()), t = resolve_block(mth.tau, sys.cols());
      if (l > sys.rows() || t > sys.cols()) continue;  // reported by validation
      const auto part = BlockPartition::uniform(sys.rows(), sys.cols(), l, t);
      const double bound = 2.0 / (static_cast<double>(part.t()) * compute_constants(sys.A, part).beta);
      if (!(mth.alpha < bound))
        warn("method " + mth.label + ": alpha = " + std::to_string(mth.alpha) +
             " exceeds the sufficient error-bound interval (0, " + std::to_string(bound) +
             ") on the first trial's matrix");
    }
  }

  int run() const {
    const ExperimentSpec spec = build_spec();
    alpha_warnings(spec);
    ExperimentOutcome res;
    try {
      res = run_experiment(spec);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    for (const auto& w : res.warnings) warn(w);

    const bool synthetic = !std::holds_alternative<MatrixMarketSource>(spec.problem);
    std::cout << "# problem " << problem_label(spec.problem) << ", " << spec.trials << " trials, tol "
              << spec.stop_tol << ", "
              << (synthetic ? "matrix redrawn per trial (seed base+trial)"
                            : "fixed matrix, sampler reseeded per trial")
              << "\n# CPU is wall time of the solve loop and only meaningful qualitatively\n";
    std::cout << std::left << std::setw(22) << "method" << std::right << std::setw(8) << "alpha" << std::setw(8)
              << "ell" << std::setw(8) << "tau" << std::setw(14) << "ITER" << std::setw(12) << "CPU"
              << std::setw(10) << "speed-up" << std::setw(11) << "converged\n";
    for (const auto& r : res.results) {
      std::cout << std::left << std::setw(22) << r.label << std::right << std::setw(8) << r.alpha
                << std::setw(8) << r.ell << std::setw(8) << r.tau << std::setw(14) << std::fixed
                << std::setprecision(2) << r.iter_mean << std::setw(12) << std::setprecision(4) << r.cpu_mean
                << std::setw(10) << std::setprecision(2) << r.speedup_vs_baseline << std::defaultfloat
                << std::setprecision(6) << std::setw(7) << r.converged_trials() << "/" << r.per_trial.size()
                << "\n";
    }
    if (!out.empty()) write_results_csv(res.results, out);
    if (!history_dir.empty()) {
      std::filesystem::create_directories(history_dir);
      for (std::size_t k = 0; k < res.results.size(); ++k) {
        std::string name = res.results[k].label;
        for (char& c : name)
          if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
        write_history_csv(res.mean_histories[k], (std::filesystem::path(history_dir) / (name + ".csv")).string());
      }
    }
    return res.any_converged ? 0 : 2;
  }
};

// ---------------------------------------------------------------------------

struct TheoryCmd {
  ProblemOpts problem;
  MethodOpts method;
  std::uint64_t seed = 1;

  int run() const {
    const LinearSystem sys = problem.load(seed);
    const auto [ell, tau] = method.shape(sys.rows(), sys.cols());
    const auto part = BlockPartition::uniform(sys.rows(), sys.cols(), ell, tau);
    const double alpha = method.alpha.value_or(default_alpha(part.t(), compute_constants(sys.A, part).beta));
    if (!(alpha > 0)) throw InputError("--alpha must be positive");
    const TheoryReport rep = build_theory_report(sys.A, ell, tau, alpha);
    std::cout << rep;
    if (!method.preset_name.empty())
      std::cout << "preset " << method.preset_name << ": "
                << preset(*parse_preset(method.preset_name), sys.rows(), sys.cols()).alpha_note << "\n";
    return 0;
  }
};

struct GenCmd {
  ProblemOpts problem;
  std::uint64_t seed = 1;
  std::string out = "problem";

  int run() const {
    if (!problem.matrix.empty()) throw InputError("gen takes --type1 or --type2");
    Vector x;
    const LinearSystem sys = problem.load(seed, &x);
    const std::filesystem::path base(out);
    if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
    write_matrix_market(out + "_A.mtx", sys.A);
    write_vector_market(out + "_b.mtx", sys.b);
    write_vector_market(out + "_x.mtx", x);
    std::cout << "wrote " << out << "_A.mtx, " << out << "_b.mtx, " << out << "_x.mtx (" << sys.rows() << " x "
              << sys.cols() << ", seed " << seed << ")\n";
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubly stochastic block Gauss-Seidel solver and benchmark"};
  app.require_subcommand(1);

  SolveCmd solve_cmd;
  auto* solve_app = app.add_subcommand("solve", "solve one problem and write its convergence history");
  solve_cmd.problem.add(solve_app);
  solve_cmd.method.add(solve_app);
  solve_app->add_option("--tol", solve_cmd.tol, "stopping tolerance")->capture_default_str();
  solve_app->add_option("--max-iters", solve_cmd.max_iters, "iteration cap")->capture_default_str();
  solve_app->add_option("--seed", solve_cmd.seed, "problem and sampler seed")->capture_default_str();
  solve_app->add_option("--out", solve_cmd.out, "history CSV path");
  solve_app->add_option("--stop", solve_cmd.stop, "stop on 'error' (||x - A^+ b||) or 'residual' (||Ax - b||)")
      ->check(CLI::IsMember({"error", "residual"}))
      ->capture_default_str();
  solve_app->add_option("--history-stride", solve_cmd.stride, "record every k-th iterate (0 = off)")
      ->capture_default_str();

  BenchCmd bench_cmd;
  auto* bench_app = app.add_subcommand("bench", "multi-trial comparison; first method is the speed-up baseline");
  bench_cmd.app = bench_app;
  bench_cmd.problem.add(bench_app);
  bench_cmd.method.add(bench_app);
  bench_app->add_option("--config", bench_cmd.config, "JSON experiment file");
  bench_app->add_option("--method", bench_cmd.method_flags, "label:alpha[:ell[:tau]], repeatable");
  bench_app->add_option("--trials", bench_cmd.trials)->capture_default_str();
  bench_app->add_option("--tol", bench_cmd.tol)->capture_default_str();
  bench_app->add_option("--max-iters", bench_cmd.max_iters)->capture_default_str();
  bench_app->add_option("--seed", bench_cmd.seed, "base seed")->capture_default_str();
  bench_app->add_option("--out", bench_cmd.out, "results CSV path");
  bench_app->add_option("--history-dir", bench_cmd.history_dir, "write mean error histories here");
  bench_app->add_option("--history-stride", bench_cmd.history_stride)->capture_default_str();
  bench_app->add_flag("--no-parallel", bench_cmd.no_parallel, "prepare trials on one thread");

  TheoryCmd theory_cmd;
  auto* theory_app = app.add_subcommand("theory", "print rates and step-size intervals");
  theory_cmd.problem.add(theory_app);
  theory_cmd.method.add(theory_app);
  theory_app->add_option("--seed", theory_cmd.seed)->capture_default_str();

  GenCmd gen_cmd;
  auto* gen_app = app.add_subcommand("gen", "write a synthetic problem as Matrix Market files");
  gen_cmd.problem.add(gen_app);
  gen_app->add_option("--seed", gen_cmd.seed)->capture_default_str();
  gen_app->add_option("--out", gen_cmd.out, "output prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*solve_app) return solve_cmd.run();
    if (*bench_app) return bench_cmd.run();
    if (*theory_app) return theory_cmd.run();
    return gen_cmd.run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
