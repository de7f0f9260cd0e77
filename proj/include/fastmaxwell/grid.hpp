#pragma once

// Uniform grids on the unit square and the 1D coupling matrices.
//
// Coefficient layout (rows run over y, columns over x):
//   U holds the y-component DOFs on vertical edges {x_i} x [y_{j-1}, y_j]:
//     U(j-1, i - i0) for y-cell j and x-node i
//     (Essential: i = 1..nx-1, Natural: i = 0..nx).
//   V holds the x-component DOFs on horizontal edges [x_{i-1}, x_i] x {y_j}:
//     V(j - j0, i-1) for y-node j and x-cell i
//     (Essential: j = 1..ny-1, Natural: j = 0..ny).
//   Nodal arrays (P, H) are indexed P(j-1, i-1) over interior nodes (x_i, y_j).
// Edge basis functions are normalized to tangential trace 1/|edge|, so an
// edge DOF is the line integral of the tangential component.

#include "fastmaxwell/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fastmaxwell {

struct Grid {
  int nx = 2;
  int ny = 2;

  static Grid square(int n) { return Grid{n, n}; }

  double hx() const { return 1.0 / nx; }
  double hy() const { return 1.0 / ny; }
  bool is_square() const { return nx == ny; }

  void validate() const {
    if (nx < 2 || ny < 2) {
      throw SizeError("grid needs at least 2 cells per direction, got " + std::to_string(nx) +
                      "x" + std::to_string(ny));
    }
  }
};

enum class Bc { Essential, Natural };

inline std::string_view to_string(Bc bc) { return bc == Bc::Essential ? "essential" : "natural"; }

inline Bc parse_bc(std::string_view s) {
  if (s == "essential") return Bc::Essential;
  if (s == "natural") return Bc::Natural;
  throw PreconditionError("unknown boundary condition '" + std::string(s) + "'");
}

struct EdgeShape {
  Eigen::Index u_rows, u_cols, v_rows, v_cols;
};

inline EdgeShape edge_shape(const Grid& g, Bc bc) {
  if (bc == Bc::Essential) return {g.ny, g.nx - 1, g.ny - 1, g.nx};
  return {g.ny, g.nx + 1, g.ny + 1, g.nx};
}

struct EdgeField {
  Bc bc = Bc::Essential;
  Matrix U;
  Matrix V;

  static EdgeField zeros(const Grid& g, Bc bc) {
    const auto s = edge_shape(g, bc);
    return {bc, Matrix::Zero(s.u_rows, s.u_cols), Matrix::Zero(s.v_rows, s.v_cols)};
  }

  /// Grid implied by the matrix shapes.
  Grid grid() const {
    return Grid{static_cast<int>(V.cols()), static_cast<int>(U.rows())};
  }

  double max_abs() const { return std::max(fastmaxwell::max_abs(U), fastmaxwell::max_abs(V)); }
};

inline void require_edge_layout(const Grid& g, Bc bc, const Matrix& u, const Matrix& v,
                                const char* what) {
  const auto s = edge_shape(g, bc);
  require_shape(u, s.u_rows, s.u_cols, what);
  require_shape(v, s.v_rows, s.v_cols, what);
}

struct NodalField {
  Matrix P;
};

/// 1D coupling matrices for partition size n.
///   A = tridiag(-1, 2, -1), D = tridiag(1, 4, 1)  (n-1)x(n-1)
///   B: (n-1) x n with B(r, r) = -1, B(r, r+1) = 1
///   Ab, Db: (n+1)x(n+1) Neumann versions (corner entries 1 and 2)
///   Bb: n x (n+1), same stencil as B
///   Mb = diag(sqrt2, 1, ..., 1, sqrt2)
/// Identity: B B^T = A.
struct CouplingMatrices {
  int n = 0;
  SparseMatrix A, D, B;
  SparseMatrix Ab, Db, Bb, Mb;
};

namespace detail {

inline SparseMatrix tridiagonal(int m, double diag, double off, double corner) {
  SparseMatrix s(m, m);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    t.emplace_back(r, r, (r == 0 || r == m - 1) ? corner : diag);
    if (r + 1 < m) {
      t.emplace_back(r, r + 1, off);
      t.emplace_back(r + 1, r, off);
    }
  }
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

inline SparseMatrix difference(int rows) {
  SparseMatrix s(rows, rows + 1);
  std::vector<Eigen::Triplet<double>> t;
  for (int r = 0; r < rows; ++r) {
    t.emplace_back(r, r, -1.0);
    t.emplace_back(r, r + 1, 1.0);
  }
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace detail

inline CouplingMatrices coupling_matrices(int n) {
  if (n < 2) throw SizeError("coupling_matrices: n must be >= 2");
  CouplingMatrices c;
  c.n = n;
  c.A = detail::tridiagonal(n - 1, 2.0, -1.0, 2.0);
  c.D = detail::tridiagonal(n - 1, 4.0, 1.0, 4.0);
  c.B = detail::difference(n - 1);
  c.Ab = detail::tridiagonal(n + 1, 2.0, -1.0, 1.0);
  c.Db = detail::tridiagonal(n + 1, 4.0, 1.0, 2.0);
  c.Bb = detail::difference(n);
  c.Mb.resize(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) c.Mb.insert(i, i) = (i == 0 || i == n) ? std::sqrt(2.0) : 1.0;
  c.Mb.makeCompressed();
  return c;
}

/// Coupling matrices for both directions of a (possibly rectangular) grid.
struct GridOperators {
  Grid grid;
  CouplingMatrices x;
  CouplingMatrices y;

  explicit GridOperators(const Grid& g) : grid(g), x(coupling_matrices(g.nx)), y(coupling_matrices(g.ny)) {}
};

}  // namespace fastmaxwell
