#pragma once

// Matrix forms of the discrete curl-curl system on the edge space.
//
// Both equations are multiplied through by hx*hy, so for a square grid
//   Essential:  U A - B^T V B^T + (a h^2/6) U D - (h^2/6) B^T P D = h^2 F
//               -B U B + A V + (a h^2/6) D V - (h^2/6) D P B      = h^2 G
//               h^2 (B U D + D V B^T)                             = 6 h^2 H
//   Natural:    U Ab - Bb V Bb + (a h^2/6) U Db                   = h^2 F
//               -Bb^T U Bb^T + Ab V + (a h^2/6) Db V              = h^2 G
// On rectangular grids every h^2 splits into hx^2 (x-coupled blocks),
// hy^2 (y-coupled blocks) and hx*hy (right-hand sides).

#include "fastmaxwell/grid.hpp"

namespace fastmaxwell {

/// Curl-curl plus alpha-mass action, left-hand sides of the two momentum
/// equations (no multiplier term).
inline EdgeField apply_system(const GridOperators& ops, const EdgeField& f, double alpha) {
  const Grid& g = ops.grid;
  require_edge_layout(g, f.bc, f.U, f.V, "apply_system");
  const double mx = alpha * g.hx() * g.hx() / 6.0;
  const double my = alpha * g.hy() * g.hy() / 6.0;
  EdgeField r{f.bc, {}, {}};
  if (f.bc == Bc::Essential) {
    const auto& x = ops.x;
    const auto& y = ops.y;
    r.U = f.U * x.A - y.B.transpose() * (f.V * x.B.transpose()) + mx * (f.U * x.D);
    r.V = -(y.B * (f.U * x.B)) + y.A * f.V + my * (y.D * f.V);
  } else {
    const auto& x = ops.x;
    const auto& y = ops.y;
    r.U = f.U * x.Ab - y.Bb * (f.V * x.Bb) + mx * (f.U * x.Db);
    r.V = -(y.Bb.transpose() * (f.U * x.Bb.transpose())) + y.Ab * f.V +
          my * (y.Db * f.V);
  }
  return r;
}

/// Multiplier contribution (essential layout): the gradient of P tested
/// against the edge basis, same scaling as apply_system.
inline EdgeField apply_gradient(const GridOperators& ops, const Matrix& P) {
  const Grid& g = ops.grid;
  require_shape(P, g.ny - 1, g.nx - 1, "apply_gradient");
  EdgeField r{Bc::Essential, {}, {}};
  r.U = -(g.hx() * g.hx() / 6.0) * (ops.y.B.transpose() * (P * ops.x.D));
  r.V = -(g.hy() * g.hy() / 6.0) * (ops.y.D * (P * ops.x.B));
  return r;
}

/// Discrete divergence, scaled so that on a square grid it reads
/// B U D + D V B^T (Essential) or Bb^T U Db + Db V Bb (Natural).
/// The general constraint is discrete_divergence = 6 H.
inline Matrix discrete_divergence(const GridOperators& ops, const EdgeField& f) {
  const Grid& g = ops.grid;
  require_edge_layout(g, f.bc, f.U, f.V, "discrete_divergence");
  const double rx = g.hx() / g.hy();
  const double ry = g.hy() / g.hx();
  if (f.bc == Bc::Essential) {
    return rx * (ops.y.B * (f.U * ops.x.D)) + ry * (ops.y.D * (f.V * ops.x.B.transpose()));
  }
  return rx * (ops.y.Bb.transpose() * (f.U * ops.x.Db)) + ry * (ops.y.Db * (f.V * ops.x.Bb));
}

/// B F + G B^T (Essential) or Bb^T F + G Bb (Natural); zero for
/// compatible data. Gauss law: (alpha/6) div = this.
inline Matrix rhs_divergence(const GridOperators& ops, const EdgeField& rhs) {
  const Grid& g = ops.grid;
  require_edge_layout(g, rhs.bc, rhs.U, rhs.V, "rhs_divergence");
  if (rhs.bc == Bc::Essential) return ops.y.B * rhs.U + rhs.V * ops.x.B.transpose();
  return ops.y.Bb.transpose() * rhs.U + rhs.V * ops.x.Bb;
}

struct SystemResidual {
  double momentum = 0.0;    // max-norm of both momentum residuals
  double constraint = 0.0;  // max-norm of the divergence residual
  double scale = 0.0;       // max-norm of the scaled right-hand side
};

/// Residual of a solution against the full linear system. For the
/// divergence-constrained variants pass H = 0; P may be empty.
inline SystemResidual system_residual(const GridOperators& ops, const EdgeField& sol,
                                      const EdgeField& rhs, double alpha, const Matrix& P = {},
                                      const Matrix& H = {}) {
  const Grid& g = ops.grid;
  const double area = g.hx() * g.hy();
  EdgeField r = apply_system(ops, sol, alpha);
  if (P.size() != 0) {
    if (sol.bc != Bc::Essential) throw PreconditionError("system_residual: multiplier needs essential layout");
    const EdgeField gp = apply_gradient(ops, P);
    r.U += gp.U;
    r.V += gp.V;
  }
  r.U -= area * rhs.U;
  r.V -= area * rhs.V;
  SystemResidual out;
  out.momentum = r.max_abs();
  out.scale = area * rhs.max_abs();
  Matrix c = discrete_divergence(ops, sol);
  if (H.size() != 0) c -= 6.0 * H;
  out.constraint = max_abs(c);
  return out;
}

}  // namespace fastmaxwell
