#pragma once

// Built-in manufactured-solution problems and a driver that assembles,
// solves and measures errors for one grid size.

#include "fastmaxwell/assembly.hpp"
#include "fastmaxwell/iterative.hpp"
#include "fastmaxwell/operators.hpp"
#include "fastmaxwell/solvers.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace fastmaxwell {

using VectorFunction = std::function<Vec2(double, double)>;
using ScalarFunction = std::function<double(double, double)>;

struct Problem {
  std::string name;
  std::string description;
  Bc bc = Bc::Essential;
  Variant variant = Variant::DivergenceConstrained;
  double alpha = 1.0;
  int ny_factor = 1;           // grid is n x (ny_factor * n)
  bool nonhomogeneous = false;  // essential data lifted from the exact trace
  VectorFunction u;            // exact solution
  ScalarFunction rot_u;        // its rot
  VectorFunction f;            // source
  ScalarFunction rho;          // divergence data (multiplier variant)
  // variable coefficients (iterative problems only)
  ScalarFunction beta;
  ScalarFunction alpha_fn;

  Grid grid(int n) const { return Grid{n, ny_factor * n}; }
  bool variable_coefficients() const { return static_cast<bool>(beta); }
};

namespace problems {

inline Problem example1() {
  Problem p;
  p.name = "example1";
  p.description = "essential, alpha = 0, polynomial solution with nonhomogeneous boundary data";
  p.bc = Bc::Essential;
  p.variant = Variant::GeneralWithMultiplier;
  p.alpha = 0.0;
  p.nonhomogeneous = true;
  p.u = [](double x, double y) {
    return Vec2{3 * x * x * x * y * y + 1, -3 * x * x * y * y * y + 3};
  };
  p.rot_u = [](double x, double y) { return -6 * x * y * y * y - 6 * x * x * x * y; };
  p.f = [](double x, double y) {
    return Vec2{-18 * x * y * y - 6 * x * x * x, 6 * y * y * y + 18 * x * x * y};
  };
  p.rho = [](double, double) { return 0.0; };
  return p;
}

inline Problem example2() {
  Problem p;
  p.name = "example2";
  p.description = "essential, alpha = -1, n x 2n grid";
  p.bc = Bc::Essential;
  p.variant = Variant::DivergenceConstrained;
  p.alpha = -1.0;
  p.ny_factor = 2;
  p.u = [](double x, double y) {
    return Vec2{std::cos(pi * x) * std::sin(pi * y), -std::sin(pi * x) * std::cos(pi * y)};
  };
  p.rot_u = [](double x, double y) { return -2 * pi * std::cos(pi * x) * std::cos(pi * y); };
  p.f = [u = p.u](double x, double y) {
    const Vec2 v = u(x, y);
    const double c = 2 * pi * pi - 1;
    return Vec2{c * v.x, c * v.y};
  };
  return p;
}

inline Problem example3() {
  Problem p;
  p.name = "example3";
  p.description = "natural, alpha = 1";
  p.bc = Bc::Natural;
  p.variant = Variant::DivergenceConstrained;
  p.alpha = 1.0;
  p.u = [](double x, double y) {
    return Vec2{std::sin(pi * x) * std::cos(pi * y), -std::cos(pi * x) * std::sin(pi * y)};
  };
  p.rot_u = [](double x, double y) { return 2 * pi * std::sin(pi * x) * std::sin(pi * y); };
  p.f = [u = p.u](double x, double y) {
    const Vec2 v = u(x, y);
    const double c = 2 * pi * pi + 1;
    return Vec2{c * v.x, c * v.y};
  };
  return p;
}

// curl(beta rot u) + alpha u = f with variable beta and alpha.
inline Problem example4() {
  Problem p;
  p.name = "example4";
  p.description = "essential, variable coefficients (iterative solvers)";
  p.bc = Bc::Essential;
  p.variant = Variant::GaussLaw;
  p.alpha = 1.0;
  p.u = [](double x, double y) {
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    return Vec2{sx * sx * sy * std::cos(pi * y), -sy * sy * sx * std::cos(pi * x)};
  };
  p.rot_u = [](double x, double y) {
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    return -pi * (sy * sy * std::cos(2 * pi * x) + sx * sx * std::cos(2 * pi * y));
  };
  p.beta = [](double x, double y) { return 3 * pi * std::cos(pi * x) * std::cos(pi * y) + 10; };
  p.alpha_fn = [](double x, double y) { return 3 * pi * std::sin(pi * x) * std::sin(pi * y); };
  p.f = [u = p.u, r = p.rot_u, b = p.beta, a = p.alpha_fn](double x, double y) {
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    const double rx = -pi * pi * std::sin(2 * pi * x) * (1 - 4 * sy * sy);
    const double ry = -pi * pi * std::sin(2 * pi * y) * (1 - 4 * sx * sx);
    const double bx = -3 * pi * pi * sx * std::cos(pi * y);
    const double by = -3 * pi * pi * std::cos(pi * x) * sy;
    const double rv = r(x, y), bv = b(x, y), av = a(x, y);
    const Vec2 uv = u(x, y);
    // curl w = (dw/dy, -dw/dx), w = beta rot u
    return Vec2{by * rv + bv * ry + av * uv.x, -(bx * rv + bv * rx) + av * uv.y};
  };
  return p;
}

inline Problem example5() {
  Problem p;
  p.name = "example5";
  p.description = "essential, alpha = 1, multiplier with nonzero divergence data";
  p.bc = Bc::Essential;
  p.variant = Variant::GeneralWithMultiplier;
  p.alpha = 1.0;
  p.u = [](double x, double y) {
    return Vec2{std::cos(pi * x) * std::sin(pi * y), std::sin(pi * x) * std::sin(pi * y)};
  };
  p.rot_u = [](double x, double y) {
    return pi * std::cos(pi * x) * (std::sin(pi * y) - std::cos(pi * y));
  };
  p.f = [](double x, double y) {
    const double sx = std::sin(pi * x), cx = std::cos(pi * x);
    const double sy = std::sin(pi * y), cy = std::cos(pi * y);
    const double pp = pi * pi;
    // curl rot u + u + grad p, p = sin(pi x) sin(pi y)
    return Vec2{pp * cx * (cy + sy) + cx * sy + pi * cx * sy,
                pp * sx * (sy - cy) + sx * sy + pi * sx * cy};
  };
  p.rho = [](double x, double y) {
    return -pi * std::sin(pi * x) * std::sin(pi * y) + pi * std::sin(pi * x) * std::cos(pi * y);
  };
  return p;
}

}  // namespace problems

inline const std::vector<Problem>& problem_registry() {
  static const std::vector<Problem> all = {problems::example1(), problems::example2(),
                                           problems::example3(), problems::example4(),
                                           problems::example5()};
  return all;
}

inline const Problem& find_problem(const std::string& name) {
  for (const auto& p : problem_registry())
    if (p.name == name) return p;
  throw PreconditionError("unknown example '" + name + "'");
}

/// Right-hand-side corrections for lifted boundary data L (full layout):
/// the interior equations see F - (K L)_int / (hx hy) and the constraint
/// sees H + div(L)_int / 6.
struct LiftedData {
  EdgeField rhs;
  Matrix H;
};

inline LiftedData lift_rhs(const GridOperators& ops, const EdgeField& lift, double alpha,
                           const EdgeField& rhs, const Matrix& H) {
  const Grid& g = ops.grid;
  const double area = g.hx() * g.hy();
  const EdgeField kl = restrict_interior(apply_system(ops, lift, alpha));
  LiftedData out{rhs, H};
  out.rhs.U -= kl.U / area;
  out.rhs.V -= kl.V / area;
  const Matrix dl = discrete_divergence(ops, lift);
  out.H += dl.block(1, 1, g.ny - 1, g.nx - 1) / 6.0;
  return out;
}

struct ProblemRun {
  Grid grid;
  ErrorNorms errors;
  double solve_seconds = 0.0;
  EdgeField field;  // full layout, boundary data included
  Matrix P;
};

/// Assemble, solve with the problem's variant and measure errors at size n.
inline ProblemRun run_problem(const Problem& p, int n) {
  if (p.variable_coefficients()) {
    throw PreconditionError(p.name + " has variable coefficients; use the iterative solvers");
  }
  const Grid g = p.grid(n);
  g.validate();
  ProblemRun run;
  run.grid = g;
  SolveConfig cfg;
  cfg.alpha = p.alpha;
  cfg.bc = p.bc;
  cfg.variant = p.variant;
  EdgeField rhs = assemble_rhs_edge(g, p.bc, p.f);
  const FastSolver solver(g, p.bc);
  using clock = std::chrono::steady_clock;
  if (p.variant == Variant::GeneralWithMultiplier) {
    Matrix H = p.rho ? assemble_rhs_nodal(g, p.rho) : Matrix::Zero(g.ny - 1, g.nx - 1);
    EdgeField lift;
    if (p.nonhomogeneous) {
      const GridOperators ops(g);
      lift = boundary_lift(g, p.u);
      auto lifted = lift_rhs(ops, lift, p.alpha, rhs, H);
      rhs = std::move(lifted.rhs);
      H = std::move(lifted.H);
    }
    const auto t0 = clock::now();
    auto sol = solver.solve_general(rhs, H, cfg);
    run.solve_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    run.field = embed_full(sol.field);
    if (p.nonhomogeneous) {
      run.field.U += lift.U;
      run.field.V += lift.V;
    }
    run.P = std::move(sol.P);
  } else {
    if (p.nonhomogeneous) throw PreconditionError(p.name + ": lifting needs the multiplier variant");
    const auto t0 = clock::now();
    EdgeField sol = solver.solve(rhs, cfg);
    run.solve_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    run.field = embed_full(sol);
  }
  run.errors = error_norms(run.field, p.u, p.rot_u);
  return run;
}

struct IterativeRun {
  Grid grid;
  KrylovResult result;
  ErrorNorms errors;
};

/// Variable-coefficient problem solved by CG or PCG at size n.
inline IterativeRun run_iterative(const Problem& p, int n, const KrylovConfig& cfg) {
  if (!p.variable_coefficients()) throw PreconditionError(p.name + " has constant coefficients");
  if (p.bc != Bc::Essential) throw PreconditionError(p.name + ": iterative solvers need essential conditions");
  const Grid g = p.grid(n);
  g.validate();
  const VariableCoeffOperator op(g, p.beta, p.alpha_fn);
  EdgeField rhs = assemble_rhs_edge(g, Bc::Essential, p.f);
  const double area = g.hx() * g.hy();
  rhs.U *= area;
  rhs.V *= area;
  IterativeRun run;
  run.grid = g;
  run.result = pcg(op, rhs, cfg);
  run.errors = error_norms(run.result.x, p.u, p.rot_u);
  return run;
}

}  // namespace fastmaxwell
