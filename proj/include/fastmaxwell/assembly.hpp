#pragma once

// Right-hand-side moments, edge interpolation and error norms.
// All quadrature is 3x3 tensor Gauss-Legendre per cell (3 points on edges).

#include "fastmaxwell/grid.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace fastmaxwell {

/// 3-point Gauss-Legendre rule on [0, 1].
struct Gauss3 {
  static constexpr int size = 3;
  std::array<double, 3> x;
  std::array<double, 3> w;
};

inline const Gauss3& gauss3() {
  static const Gauss3 rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return Gauss3{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

namespace detail {

inline void check_finite(bool ok, const char* what) {
  if (!ok) throw EvaluationError(std::string(what) + ": source produced a non-finite value");
}

// Runs body(l) for every cell row l, even rows first, then odd rows. Rows
// of one color touch disjoint node/edge rows, so accumulation is race free
// and the summation order does not depend on the thread count.
template <class Body>
void for_each_cell_row_colored(int ny, Body&& body) {
  for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
    for (int l = color; l < ny; l += 2) body(l);
  }
}

}  // namespace detail

/// Full-layout (natural-size) edge field from an essential one: boundary
/// DOFs set to zero.
inline EdgeField embed_full(const EdgeField& f) {
  if (f.bc == Bc::Natural) return f;
  const Grid g = f.grid();
  EdgeField out = EdgeField::zeros(g, Bc::Natural);
  out.U.block(0, 1, g.ny, g.nx - 1) = f.U;
  out.V.block(1, 0, g.ny - 1, g.nx) = f.V;
  return out;
}

/// Interior DOFs of a full-layout field, as an essential field.
inline EdgeField restrict_interior(const EdgeField& f) {
  if (f.bc == Bc::Essential) return f;
  const Grid g = f.grid();
  return {Bc::Essential, f.U.block(0, 1, g.ny, g.nx - 1), f.V.block(1, 0, g.ny - 1, g.nx)};
}

/// Load moments F(l, i) = (f, N1), G(j, k) = (f, N2) for the given layout.
/// In the returned EdgeField, U holds F and V holds G.
template <class Source>
EdgeField assemble_rhs_edge(const Grid& g, Bc bc, Source&& f) {
  g.validate();
  const auto& q = gauss3();
  const double hx = g.hx();
  const double hy = g.hy();
  EdgeField full = EdgeField::zeros(g, Bc::Natural);
  Matrix& F = full.U;
  Matrix& G = full.V;
  int bad = 0;
  detail::for_each_cell_row_colored(g.ny, [&](int l) {
    const double y0 = l * hy;
    for (int k = 0; k < g.nx; ++k) {
      const double x0 = k * hx;
      double fl = 0, fr = 0, gb = 0, gt = 0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const Vec2 v = f(x0 + q.x[a] * hx, y0 + q.x[b] * hy);
          if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
#pragma omp atomic write
            bad = 1;
          }
          const double w = q.w[a] * q.w[b];
          // N1 = (0, phi(x) / hy) on the cell, N2 = (phi(y) / hx, 0).
          fl += w * v.y * (1.0 - q.x[a]);
          fr += w * v.y * q.x[a];
          gb += w * v.x * (1.0 - q.x[b]);
          gt += w * v.x * q.x[b];
        }
      }
      F(l, k) += hx * fl;
      F(l, k + 1) += hx * fr;
      G(l, k) += hy * gb;
      G(l + 1, k) += hy * gt;
    }
  });
  detail::check_finite(bad == 0, "assemble_rhs_edge");
  return bc == Bc::Natural ? full : restrict_interior(full);
}

/// Nodal moments H(j-1, i-1) = (rho, phi_ij) over interior nodes.
template <class Density>
Matrix assemble_rhs_nodal(const Grid& g, Density&& rho) {
  g.validate();
  const auto& q = gauss3();
  const double hx = g.hx();
  const double hy = g.hy();
  Matrix full = Matrix::Zero(g.ny + 1, g.nx + 1);
  int bad = 0;
  detail::for_each_cell_row_colored(g.ny, [&](int l) {
    const double y0 = l * hy;
    for (int k = 0; k < g.nx; ++k) {
      const double x0 = k * hx;
      double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double r = rho(x0 + q.x[a] * hx, y0 + q.x[b] * hy);
          if (!std::isfinite(r)) {
#pragma omp atomic write
            bad = 1;
          }
          const double w = q.w[a] * q.w[b] * r;
          const double px = q.x[a];
          const double py = q.x[b];
          m00 += w * (1 - px) * (1 - py);
          m01 += w * px * (1 - py);
          m10 += w * (1 - px) * py;
          m11 += w * px * py;
        }
      }
      const double area = hx * hy;
      full(l, k) += area * m00;
      full(l, k + 1) += area * m01;
      full(l + 1, k) += area * m10;
      full(l + 1, k + 1) += area * m11;
    }
  });
  detail::check_finite(bad == 0, "assemble_rhs_nodal");
  return full.block(1, 1, g.ny - 1, g.nx - 1);
}

/// Edge interpolant: every DOF is the line integral of the tangential
/// component over its edge (exact for the FE space).
template <class Field>
EdgeField interpolate_edge(const Grid& g, Bc bc, Field&& u) {
  g.validate();
  const auto& q = gauss3();
  const double hx = g.hx();
  const double hy = g.hy();
  EdgeField full = EdgeField::zeros(g, Bc::Natural);
  int bad = 0;
#pragma omp parallel for schedule(static)
  for (int l = 0; l <= g.ny; ++l) {
    for (int k = 0; k <= g.nx; ++k) {
      if (l < g.ny) {
        double s = 0;
        for (int a = 0; a < 3; ++a) s += q.w[a] * u(k * hx, (l + q.x[a]) * hy).y;
        full.U(l, k) = hy * s;
      }
      if (k < g.nx) {
        double s = 0;
        for (int a = 0; a < 3; ++a) s += q.w[a] * u((k + q.x[a]) * hx, l * hy).x;
        full.V(l, k) = hx * s;
      }
    }
  }
  for (Eigen::Index i = 0; i < full.U.size(); ++i) bad |= !std::isfinite(full.U.data()[i]);
  for (Eigen::Index i = 0; i < full.V.size(); ++i) bad |= !std::isfinite(full.V.data()[i]);
  detail::check_finite(bad == 0, "interpolate_edge");
  return bc == Bc::Natural ? full : restrict_interior(full);
}

/// Full-layout field carrying only the boundary DOFs of the interpolant of u
/// (used to lift nonhomogeneous essential data).
template <class Field>
EdgeField boundary_lift(const Grid& g, Field&& u) {
  EdgeField lift = interpolate_edge(g, Bc::Natural, u);
  lift.U.block(0, 1, g.ny, g.nx - 1).setZero();
  lift.V.block(1, 0, g.ny - 1, g.nx).setZero();
  return lift;
}

struct ErrorNorms {
  double l2 = 0.0;   // ||u - u_h||
  double rot = 0.0;  // ||rot(u - u_h)||
};

/// L2 and rot errors of the edge field against an exact solution. An
/// essential field is embedded with zero boundary DOFs first.
template <class Field, class Rot>
ErrorNorms error_norms(const EdgeField& field, Field&& u, Rot&& rot_u) {
  const EdgeField f = embed_full(field);
  const Grid g = f.grid();
  const auto& q = gauss3();
  const double hx = g.hx();
  const double hy = g.hy();
  std::vector<double> row_l2(g.ny, 0.0), row_rot(g.ny, 0.0);
#pragma omp parallel for schedule(static)
  for (int l = 0; l < g.ny; ++l) {
    const double y0 = l * hy;
    double e2 = 0, r2 = 0;
    for (int k = 0; k < g.nx; ++k) {
      const double x0 = k * hx;
      const double ul = f.U(l, k), ur = f.U(l, k + 1);
      const double vb = f.V(l, k), vt = f.V(l + 1, k);
      const double roth = ((ur - ul) - (vt - vb)) / (hx * hy);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double px = q.x[a], py = q.x[b];
          const double x = x0 + px * hx, y = y0 + py * hy;
          const Vec2 ue = u(x, y);
          const double u1 = (vb * (1 - py) + vt * py) / hx;
          const double u2 = (ul * (1 - px) + ur * px) / hy;
          const double w = q.w[a] * q.w[b];
          e2 += w * ((ue.x - u1) * (ue.x - u1) + (ue.y - u2) * (ue.y - u2));
          const double dr = rot_u(x, y) - roth;
          r2 += w * dr * dr;
        }
      }
    }
    row_l2[l] = e2;
    row_rot[l] = r2;
  }
  double e2 = 0, r2 = 0;
  for (int l = 0; l < g.ny; ++l) {
    e2 += row_l2[l];
    r2 += row_rot[l];
  }
  return {std::sqrt(e2 * hx * hy), std::sqrt(r2 * hx * hy)};
}

}  // namespace fastmaxwell
