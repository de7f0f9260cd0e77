#pragma once

// Command-line harness: solve, eigs, convergence, bench, pcg, verify.
// run_cli() is separate from main() so the tests can drive it in-process.

#include "fastmaxwell/fastmaxwell.hpp"

#include <CLI11.hpp>

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fastmaxwell::cli {

enum ExitCode { ok = 0, verification_failed = 1, usage_error = 2 };

struct Options {
  int n = 0;
  int nx = 0;
  int ny = 0;
  std::string example;
  std::string source = "example";
  std::string bc;
  std::optional<double> alpha;
  std::string variant;
  double tol = 1e-14;
  int reps = 3;
  int threads = 0;
  std::string out;
  std::vector<int> sizes;
  std::string method = "pcg";
  std::string dump;
  std::string fault = "none";
  std::uint64_t seed = 1;
  int rhs_count = 10;
  int max_iter = 100000;
  bool shortcut = false;
  bool smallest = false;
  double alpha0 = 1.0;
  double beta0 = 1.0;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

inline double peak_rss_mb() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<double>(ru.ru_maxrss) / 1024.0;  // ru_maxrss is in KiB on Linux
}

inline Grid grid_from(const Options& o, int ny_factor = 1) {
  if (o.nx > 0 || o.ny > 0) {
    if (o.nx <= 0 || o.ny <= 0) throw UsageError("--nx and --ny must be given together");
    return Grid{o.nx, o.ny};
  }
  if (o.n <= 0) throw UsageError("grid size missing: pass --n or --nx/--ny");
  return Grid{o.n, ny_factor * o.n};
}

inline std::vector<int> default_sizes(std::vector<int> s, std::vector<int> fallback) {
  return s.empty() ? fallback : s;
}

// Compatible random load: the curl-curl action of a random field is
// orthogonal to every discrete gradient.
inline EdgeField random_source(const Grid& g, Bc bc, Variant v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EdgeField w = random_rhs(g, bc, rng);
  if (v != Variant::DivergenceConstrained) return w;
  const GridOperators ops(g);
  EdgeField r = apply_system(ops, w, 0.0);
  const double area = g.hx() * g.hy();
  r.U /= area;
  r.V /= area;
  return r;
}

inline int cmd_solve(const Options& o, std::ostream& os) {
  CsvWriter csv(os, {"source", "nx", "ny", "bc", "variant", "alpha", "l2_error", "rot_error",
                     "relative_residual", "solve_seconds"});
  // momentum rows against the scaled load, constraint rows against the
  // size of their own terms
  auto residual_of = [](const SystemResidual& r, double cscale) {
    return std::max(r.momentum / std::max(r.scale, 1e-300), r.constraint / std::max(cscale, 1e-300));
  };

  auto dump_fields = [&](const Grid& g, const EdgeField& f, const Matrix* P) {
    if (o.dump.empty()) return;
    write_dump(o.dump + "_U.bin", static_cast<std::uint32_t>(g.nx), f.U);
    write_dump(o.dump + "_V.bin", static_cast<std::uint32_t>(g.nx), f.V);
    if (P) write_dump(o.dump + "_P.bin", static_cast<std::uint32_t>(g.nx), *P);
  };
  if (o.source == "random") {
    const Grid g = grid_from(o);
    g.validate();
    SolveConfig cfg;
    cfg.bc = o.bc.empty() ? Bc::Essential : parse_bc(o.bc);
    cfg.variant = o.variant.empty() ? Variant::DivergenceConstrained : parse_variant(o.variant);
    cfg.alpha = o.alpha.value_or(1.0);
    cfg.shortcut = o.shortcut;
    const EdgeField rhs = random_source(g, cfg.bc, cfg.variant, o.seed);
    const FastSolver solver(g, cfg.bc);
    const GridOperators ops(g);
    const auto t0 = std::chrono::steady_clock::now();
    double res = 0.0, secs = 0.0;
    if (cfg.variant == Variant::GeneralWithMultiplier) {
      std::mt19937_64 rng(o.seed + 1);
      std::normal_distribution<double> nd;
      Matrix H(g.ny - 1, g.nx - 1);
      for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = nd(rng);
      const auto sol = solver.solve_general(rhs, H, cfg);
      secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res = residual_of(system_residual(ops, sol.field, rhs, cfg.alpha, sol.P, H),
                        std::max(6.0 * max_abs(H), sol.field.max_abs()));
      dump_fields(g, sol.field, &sol.P);
    } else {
      const EdgeField sol = solver.solve(rhs, cfg);
      secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      SystemResidual r = system_residual(ops, sol, rhs, cfg.alpha);
      double cscale = sol.max_abs();
      if (cfg.variant == Variant::GaussLaw) {
        // Gauss variant: the constraint row is (alpha/6) div = div-moments
        const Matrix rd = rhs_divergence(ops, rhs);
        r.constraint = max_abs((cfg.alpha / 6.0) * discrete_divergence(ops, sol) - rd);
        cscale = max_abs(rd);
      }
      res = residual_of(r, cscale);
      dump_fields(g, sol, nullptr);
    }
    csv.row({std::string("random"), static_cast<long long>(g.nx), static_cast<long long>(g.ny),
             std::string(to_string(cfg.bc)), std::string(to_string(cfg.variant)), cfg.alpha, std::string(),
             std::string(), res, secs});
    return ok;
  }
  if (o.source != "example") throw UsageError("--source must be 'example' or 'random'");
  if (o.example.empty()) throw UsageError("solve needs --example or --source random");
  Problem p = find_problem(o.example);
  if (!o.bc.empty() && parse_bc(o.bc) != p.bc) throw UsageError(p.name + " fixes the boundary condition");
  if (!o.variant.empty() && parse_variant(o.variant) != p.variant) {
    throw UsageError(p.name + " fixes the solver variant");
  }
  if (o.alpha && *o.alpha != p.alpha) throw UsageError(p.name + " fixes alpha");
  if (p.variable_coefficients()) throw UsageError(p.name + " has variable coefficients; use the pcg command");
  const Grid g = grid_from(o, p.ny_factor);
  if (g.ny != p.ny_factor * g.nx) {
    throw UsageError(p.name + " runs on an n x " + std::to_string(p.ny_factor) + "n grid");
  }
  const ProblemRun run = run_problem(p, g.nx);
  const EdgeField interior = p.bc == Bc::Essential ? restrict_interior(run.field) : run.field;
  if (!o.dump.empty()) dump_fields(g, interior, run.P.size() ? &run.P : nullptr);
  csv.row({p.name, static_cast<long long>(g.nx), static_cast<long long>(g.ny), std::string(to_string(p.bc)),
           std::string(to_string(p.variant)), p.alpha, run.errors.l2, run.errors.rot, std::string(),
           run.solve_seconds});
  return ok;
}

inline int cmd_eigs(const Options& o, std::ostream& os) {
  if (o.smallest) {
    CsvWriter csv(os, {"n", "lambda_min", "error", "error_ratio"});
    double prev = 0.0;
    for (int n : default_sizes(o.sizes, {16, 32, 64, 128})) {
      require_partition(n, "eigs");
      const double lam = smallest_eigenvalue(n);
      const double err = std::abs(lam - pi * pi);
      const CsvCell ratio = prev > 0.0 ? CsvCell(prev / err) : CsvCell(std::string());
      csv.row({static_cast<long long>(n), lam, err, ratio});
      prev = err;
    }
    return ok;
  }
  if (o.n <= 0) throw UsageError("eigs needs --n");
  const Bc bc = o.bc.empty() ? Bc::Essential : parse_bc(o.bc);
  const auto cat = eigen_catalog(o.n, bc);
  CsvWriter csv(os, {"i", "j", "lambda", "family"});
  for (const auto& m : cat.modes()) {
    const double lam = m.family == Family::DivergenceFree ? discrete_eigenvalue(o.n, m.i, m.j) : 0.0;
    csv.row({static_cast<long long>(m.i), static_cast<long long>(m.j), lam, std::string(to_string(m.family))});
  }
  return ok;
}

inline KrylovConfig krylov_config(const Options& o) {
  KrylovConfig k;
  k.tol = o.tol;
  k.max_iter = o.max_iter;
  k.alpha0 = o.alpha0;
  k.beta0 = o.beta0;
  k.keep_history = false;
  if (o.method == "pcg") {
    k.preconditioner = Preconditioner::ConstantCoeffFast;
  } else if (o.method == "cg") {
    k.preconditioner = Preconditioner::None;
  } else {
    throw UsageError("--method must be cg or pcg");
  }
  return k;
}

inline int cmd_convergence(const Options& o, std::ostream& os) {
  if (o.example.empty()) throw UsageError("convergence needs --example");
  const Problem& p = find_problem(o.example);
  CsvWriter csv(os, {"n", "l2_error", "l2_order", "rot_error", "rot_order", "time_seconds"});
  std::optional<ErrorNorms> prev;
  int prev_n = 0;
  for (int n : default_sizes(o.sizes, {32, 64, 128, 256})) {
    ErrorNorms e;
    double secs = 0.0;
    if (p.variable_coefficients()) {
      const auto run = run_iterative(p, n, krylov_config(o));
      e = run.errors;
      secs = run.result.seconds;
    } else {
      const auto run = run_problem(p, n);
      e = run.errors;
      secs = run.solve_seconds;
    }
    CsvCell l2o = std::string(), roto = std::string();
    if (prev) {
      const double r = std::log2(static_cast<double>(n) / prev_n);
      l2o = std::log2(prev->l2 / e.l2) / r;
      roto = std::log2(prev->rot / e.rot) / r;
    }
    csv.row({static_cast<long long>(n), e.l2, l2o, e.rot, roto, secs});
    prev = e;
    prev_n = n;
  }
  return ok;
}

struct BenchRow {
  int n = 0;
  double seconds = 0.0;
  double peak_rss_mb = 0.0;
};

/// Fast-solve wall time on random data, one component at a time so that
/// only one n x n matrix is alive. Warm-up discarded, minimum of reps.
inline BenchRow bench_one(int n, Bc bc, Variant variant, double alpha, int reps, std::uint64_t seed) {
  if (variant == Variant::GeneralWithMultiplier) throw UsageError("bench supports divergence and gauss");
  const Grid g = Grid::square(n);
  const FastSolver solver(g, bc);
  SolveConfig cfg;
  cfg.bc = bc;
  cfg.variant = variant;
  cfg.alpha = alpha;
  const auto shape = edge_shape(g, bc);
  auto fill = [&](Matrix& m, std::uint64_t s) {
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = ud(rng);
  };
  double best = std::numeric_limits<double>::infinity();
  using clock = std::chrono::steady_clock;
  for (int r = 0; r <= reps; ++r) {
    double t = 0.0;
    if (variant == Variant::DivergenceConstrained) {
      Matrix m(shape.u_rows, shape.u_cols);
      fill(m, seed + 2 * r);
      auto t0 = clock::now();
      solver.solve_u_inplace(m, cfg);
      t += std::chrono::duration<double>(clock::now() - t0).count();
      m.resize(0, 0);
      m.resize(shape.v_rows, shape.v_cols);
      fill(m, seed + 2 * r + 1);
      t0 = clock::now();
      solver.solve_v_inplace(m, cfg);
      t += std::chrono::duration<double>(clock::now() - t0).count();
    } else {
      EdgeField f = EdgeField::zeros(g, bc);
      fill(f.U, seed + 2 * r);
      fill(f.V, seed + 2 * r + 1);
      const auto t0 = clock::now();
      f = solver.solve(f, cfg);
      t = std::chrono::duration<double>(clock::now() - t0).count();
    }
    if (r > 0) best = std::min(best, t);  // r == 0 is the warm-up
  }
  return {n, best, peak_rss_mb()};
}

inline int cmd_bench(const Options& o, std::ostream& os, std::ostream& es) {
  if (o.reps < 1) throw UsageError("--reps must be at least 1");
  const Bc bc = o.bc.empty() ? Bc::Essential : parse_bc(o.bc);
  const Variant v = o.variant.empty() ? Variant::DivergenceConstrained : parse_variant(o.variant);
  const double alpha = o.alpha.value_or(1.0);
  CsvWriter csv(os, {"n", "seconds", "ratio", "peak_rss_mb"});
  std::vector<BenchRow> rows;
  for (int n : default_sizes(o.sizes, {256, 512, 1024, 2048})) {
    require_partition(n, "bench");
    rows.push_back(bench_one(n, bc, v, alpha, o.reps, o.seed));
    const CsvCell ratio = rows.size() > 1 ? CsvCell(rows.back().seconds / rows[rows.size() - 2].seconds)
                                          : CsvCell(std::string());
    csv.row({static_cast<long long>(n), rows.back().seconds, ratio, rows.back().peak_rss_mb});
    os.flush();
  }
  if (rows.size() >= 2) {
    // least-squares slope of log(time) against log(n^2 log n)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
      const double x = std::log(static_cast<double>(r.n) * r.n * std::log2(static_cast<double>(r.n)));
      const double y = std::log(r.seconds);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = static_cast<double>(rows.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    es << "# slope of log(time) vs log(n^2 log2 n): " << format_double(slope) << "\n";
  }
  return ok;
}

inline int cmd_pcg(const Options& o, std::ostream& os) {
  const Problem& p = find_problem(o.example.empty() ? "example4" : o.example);
  const KrylovConfig k = krylov_config(o);
  std::vector<int> sizes = o.sizes;
  if (sizes.empty()) {
    if (o.n <= 0) throw UsageError("pcg needs --n or --sizes");
    sizes = {o.n};
  }
  CsvWriter csv(os, {"n", "method", "iterations", "converged", "seconds", "relative_residual", "l2_error",
                     "rot_error"});
  int rc = ok;
  for (int n : sizes) {
    const auto run = run_iterative(p, n, k);
    csv.row({static_cast<long long>(n), o.method, static_cast<long long>(run.result.iterations),
             static_cast<long long>(run.result.converged ? 1 : 0), run.result.seconds,
             run.result.relative_residual, run.errors.l2, run.errors.rot});
    os.flush();
    if (!run.result.converged) rc = verification_failed;
  }
  return rc;
}

inline int cmd_verify(const Options& o, std::ostream& os) {
  Fault fault = Fault::None;
  if (o.fault == "tau-sign") {
    fault = Fault::TauSign;
  } else if (o.fault != "none") {
    throw UsageError("--fault must be none or tau-sign");
  }
  std::vector<Bc> bcs = {Bc::Essential, Bc::Natural};
  if (!o.bc.empty()) bcs = {parse_bc(o.bc)};
  std::vector<int> sizes = o.sizes;
  if (sizes.empty()) {
    for (int n = 2; n <= 16; ++n) sizes.push_back(n);
  }
  for (int n : sizes) {
    if (n < 2 || n > 16) throw UsageError("verify runs for 2 <= n <= 16");
  }
  std::vector<Check> checks;
  auto add = [&](std::vector<Check> c) { checks.insert(checks.end(), c.begin(), c.end()); };
  for (int n : sizes) {
    add(structure_identities(n, 1e-11, fault));
    add(transform_agreement(n, 1e-12));
    for (Bc bc : bcs) add(eigen_checks(n, bc, 1e-10));
    for (const auto& c : oracle_cases()) {
      if (std::find(bcs.begin(), bcs.end(), c.bc) == bcs.end()) continue;
      checks.push_back(oracle_equivalence(Grid::square(n), c, o.rhs_count, o.seed + n, 1e-10));
    }
    for (Bc bc : bcs) checks.push_back(gauss_law_residual(n, bc, 1.0, o.seed + n, 1e-11));
  }
  CsvWriter csv(os, {"check", "passed", "value", "threshold"});
  bool all = true;
  for (const auto& c : checks) {
    csv.row({c.name, std::string(c.passed ? "PASS" : "FAIL"), c.value, c.threshold});
    all = all && c.passed;
  }
  return all ? ok : verification_failed;
}

/// Parses args (args[0] is the program name) and runs one subcommand.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fast Maxwell curl-curl solvers on the unit square"};
  app.require_subcommand(1);
  Options o;
  auto grid_flags = [&](CLI::App* s) {
    s->add_option("--n", o.n, "partition size (n x n grid)")->check(CLI::PositiveNumber);
    s->add_option("--nx", o.nx, "partitions in x")->check(CLI::PositiveNumber);
    s->add_option("--ny", o.ny, "partitions in y")->check(CLI::PositiveNumber);
  };
  auto common = [&](CLI::App* s) {
    s->add_option("--out", o.out, "write CSV to FILE instead of stdout");
    s->add_option("--threads", o.threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    s->add_option("--seed", o.seed, "random seed");
  };
  auto* solve = app.add_subcommand("solve", "solve one problem and report errors");
  grid_flags(solve);
  common(solve);
  solve->add_option("--example", o.example, "example1..example5");
  solve->add_option("--source", o.source, "example or random")->check(CLI::IsMember({"example", "random"}));
  solve->add_option("--bc", o.bc, "essential or natural");
  solve->add_option("--alpha", o.alpha, "mass coefficient");
  solve->add_option("--variant", o.variant, "divergence, gauss or general");
  solve->add_flag("--shortcut", o.shortcut, "derive V from U (divergence variant)");
  solve->add_option("--dump", o.dump, "write PREFIX_U.bin, PREFIX_V.bin (and PREFIX_P.bin)");

  auto* eigs = app.add_subcommand("eigs", "list discrete eigenpairs");
  grid_flags(eigs);
  common(eigs);
  eigs->add_option("--bc", o.bc, "essential or natural");
  eigs->add_flag("--smallest", o.smallest, "smallest nonzero eigenvalue against pi^2 over --sizes");
  eigs->add_option("--sizes", o.sizes, "grid sizes")->delimiter(',');

  auto* conv = app.add_subcommand("convergence", "error table over grid sizes");
  common(conv);
  conv->add_option("--example", o.example, "example1..example5")->required();
  conv->add_option("--sizes", o.sizes, "grid sizes")->delimiter(',');
  conv->add_option("--method", o.method, "cg or pcg (example4)");
  conv->add_option("--tol", o.tol, "relative residual tolerance (example4)");

  auto* bench = app.add_subcommand("bench", "fast-solve timings on random data");
  common(bench);
  bench->add_option("--sizes", o.sizes, "grid sizes")->delimiter(',');
  bench->add_option("--reps", o.reps, "timed repetitions after one warm-up");
  bench->add_option("--bc", o.bc, "essential or natural");
  bench->add_option("--alpha", o.alpha, "mass coefficient");
  bench->add_option("--variant", o.variant, "divergence or gauss");

  auto* pcgc = app.add_subcommand("pcg", "CG / PCG on a variable-coefficient example");
  common(pcgc);
  pcgc->add_option("--n", o.n, "partition size")->check(CLI::PositiveNumber);
  pcgc->add_option("--sizes", o.sizes, "grid sizes")->delimiter(',');
  pcgc->add_option("--example", o.example, "variable-coefficient example (default example4)");
  pcgc->add_option("--method", o.method, "cg or pcg");
  pcgc->add_option("--tol", o.tol, "relative residual tolerance");
  pcgc->add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  pcgc->add_option("--alpha0", o.alpha0, "preconditioner alpha");
  pcgc->add_option("--beta0", o.beta0, "preconditioner beta");

  auto* verify = app.add_subcommand("verify", "fast paths against dense references");
  common(verify);
  verify->add_option("--sizes", o.sizes, "grid sizes, 2..16")->delimiter(',');
  verify->add_option("--bc", o.bc, "restrict to one boundary condition");
  verify->add_option("--rhs", o.rhs_count, "random right-hand sides per case")->check(CLI::PositiveNumber);
  verify->add_option("--fault", o.fault, "inject a known defect: none or tau-sign");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  }

  try {
#ifdef _OPENMP
    if (o.threads > 0) omp_set_num_threads(o.threads);
#endif
    std::ofstream file;
    std::ostream* os = &out;
    if (!o.out.empty()) {
      file.open(o.out);
      if (!file) throw UsageError("cannot open '" + o.out + "'");
      os = &file;
    }
    if (solve->parsed()) return cmd_solve(o, *os);
    if (eigs->parsed()) return cmd_eigs(o, *os);
    if (conv->parsed()) return cmd_convergence(o, *os);
    if (bench->parsed()) return cmd_bench(o, *os, err);
    if (pcgc->parsed()) return cmd_pcg(o, *os);
    if (verify->parsed()) return cmd_verify(o, *os);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const SizeError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return verification_failed;
  }
  return usage_error;
}

}  // namespace fastmaxwell::cli
