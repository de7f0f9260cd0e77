#pragma once

// Dense reference solves for small grids.
//
// Unknowns are stacked as [vec U; vec V; vec P] with row-wise vec, so
// vec(L X R) = (L kron R^T) vec(X).

#include "fastmaxwell/assembly.hpp"
#include "fastmaxwell/operators.hpp"
#include "fastmaxwell/solvers.hpp"
#include "fastmaxwell/transforms.hpp"

#include <Eigen/QR>

#include <random>

namespace fastmaxwell {

inline constexpr int oracle_max_n = 64;

/// Dense Kronecker product.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

inline Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// Explicit transform-matrix product along an axis.
inline Matrix naive_transform(TransformKind kind, int n, const Matrix& x, Axis axis = Axis::Cols) {
  const Matrix t = transform_matrix(kind, n);
  return axis == Axis::Cols ? Matrix(t * x) : Matrix(x * t.transpose());
}

struct DenseSaddleSystem {
  Grid grid;
  Bc bc = Bc::Essential;
  Variant variant = Variant::DivergenceConstrained;
  double alpha = 0.0;
  Matrix K;                  // full operator
  Eigen::Index nu = 0;       // size of vec U
  Eigen::Index nv = 0;       // size of vec V
  Eigen::Index np = 0;       // multiplier unknowns kept
  Eigen::Index p_rows = 0;   // multiplier layout before grounding
  Eigen::Index p_cols = 0;
  bool grounded = false;     // natural multiplier pinned at node (0, 0)
};

struct DenseSolution {
  EdgeField field;
  Matrix P;  // multiplier in its matrix layout (empty for the Gauss variant)
};

namespace detail {

struct DenseBlocks {
  Matrix Kuu, Kuv, Kvu, Kvv;  // momentum operator
  Matrix Cu, Cv;              // scaled divergence
};

inline DenseBlocks dense_blocks(const GridOperators& ops, Bc bc, double alpha) {
  const Grid& g = ops.grid;
  const double mx = alpha * g.hx() * g.hx() / 6.0;
  const double my = alpha * g.hy() * g.hy() / 6.0;
  const double rx = g.hx() / g.hy(), ry = g.hy() / g.hx();
  DenseBlocks b;
  if (bc == Bc::Essential) {
    const Matrix Ax(ops.x.A), Dx(ops.x.D), Bx(ops.x.B), Ay(ops.y.A), Dy(ops.y.D), By(ops.y.B);
    const Matrix Iy = Matrix::Identity(g.ny, g.ny), Ix = Matrix::Identity(g.nx, g.nx);
    // U A_x - B_y^T V B_x^T + mx U D_x
    b.Kuu = kron(Iy, Ax) + mx * kron(Iy, Dx);
    b.Kuv = -kron(By.transpose(), Bx);
    // -B_y U B_x + A_y V + my D_y V
    b.Kvu = -kron(By, Bx.transpose());
    b.Kvv = kron(Ay, Ix) + my * kron(Dy, Ix);
    // rx B_y U D_x + ry D_y V B_x^T
    b.Cu = rx * kron(By, Dx);
    b.Cv = ry * kron(Dy, Bx);
  } else {
    const Matrix Ax(ops.x.Ab), Dx(ops.x.Db), Bx(ops.x.Bb), Ay(ops.y.Ab), Dy(ops.y.Db), By(ops.y.Bb);
    const Matrix Iy = Matrix::Identity(g.ny, g.ny), Ix = Matrix::Identity(g.nx, g.nx);
    // U Ab_x - Bb_y V Bb_x + mx U Db_x
    b.Kuu = kron(Iy, Ax) + mx * kron(Iy, Dx);
    b.Kuv = -kron(By, Bx.transpose());
    // -Bb_y^T U Bb_x^T + Ab_y V + my Db_y V
    b.Kvu = -kron(By.transpose(), Bx);
    b.Kvv = kron(Ay, Ix) + my * kron(Dy, Ix);
    // rx Bb_y^T U Db_x + ry Db_y V Bb_x
    b.Cu = rx * kron(By.transpose(), Dx);
    b.Cv = ry * kron(Dy, Bx.transpose());
  }
  return b;
}

}  // namespace detail

/// Dense operator of the requested variant. The constrained variants are
/// assembled in augmented form [K, G; C, 0] with G = -(hx hy / 6) C^T.
inline DenseSaddleSystem assemble_dense(const Grid& g, Bc bc, Variant variant, double alpha) {
  g.validate();
  if (g.nx > oracle_max_n || g.ny > oracle_max_n) {
    throw SizeError("assemble_dense: grid larger than " + std::to_string(oracle_max_n) +
                    " is refused by the dense oracle");
  }
  if (variant == Variant::GeneralWithMultiplier && bc != Bc::Essential) {
    throw PreconditionError("assemble_dense: multiplier variant needs essential conditions");
  }
  const GridOperators ops(g);
  const auto b = detail::dense_blocks(ops, bc, alpha);
  DenseSaddleSystem s;
  s.grid = g;
  s.bc = bc;
  s.variant = variant;
  s.alpha = alpha;
  s.nu = b.Kuu.rows();
  s.nv = b.Kvv.rows();
  const Eigen::Index ne = s.nu + s.nv;
  if (variant == Variant::GaussLaw) {
    s.K.resize(ne, ne);
    s.K << b.Kuu, b.Kuv, b.Kvu, b.Kvv;
    return s;
  }
  s.p_rows = bc == Bc::Essential ? g.ny - 1 : g.ny + 1;
  s.p_cols = bc == Bc::Essential ? g.nx - 1 : g.nx + 1;
  Matrix C(b.Cu.rows(), ne);
  C << b.Cu, b.Cv;
  if (bc == Bc::Natural) {
    // constants lie in the kernel of the gradient; pin node (0, 0)
    C = C.bottomRows(C.rows() - 1).eval();
    s.grounded = true;
  }
  s.np = C.rows();
  const double w = -g.hx() * g.hy() / 6.0;
  s.K = Matrix::Zero(ne + s.np, ne + s.np);
  s.K.block(0, 0, s.nu, s.nu) = b.Kuu;
  s.K.block(0, s.nu, s.nu, s.nv) = b.Kuv;
  s.K.block(s.nu, 0, s.nv, s.nu) = b.Kvu;
  s.K.block(s.nu, s.nu, s.nv, s.nv) = b.Kvv;
  s.K.block(0, ne, ne, s.np) = w * C.transpose();
  s.K.block(ne, 0, s.np, ne) = C;
  return s;
}

/// Right-hand side vector: hx hy [vec F; vec G] and 6 vec H for the
/// constraint rows (H = 0 when empty).
inline Vector dense_rhs(const DenseSaddleSystem& s, const EdgeField& rhs, const Matrix& H = {}) {
  require_edge_layout(s.grid, s.bc, rhs.U, rhs.V, "dense_rhs");
  const double area = s.grid.hx() * s.grid.hy();
  Vector r = Vector::Zero(s.K.rows());
  r.head(s.nu) = area * vec(rhs.U);
  r.segment(s.nu, s.nv) = area * vec(rhs.V);
  if (H.size() != 0 && s.np > 0) {
    require_shape(H, s.p_rows, s.p_cols, "dense_rhs(H)");
    Vector h = 6.0 * vec(H);
    r.tail(s.np) = s.grounded ? Vector(h.tail(s.np)) : h;
  }
  return r;
}

/// Full-pivot LU solve; numerically singular systems are reported with a
/// reciprocal condition estimate.
inline Vector solve_dense(const DenseSaddleSystem& s, const Vector& rhs) {
  if (rhs.size() != s.K.rows()) throw SizeError("solve_dense: right-hand side length mismatch");
  Eigen::FullPivLU<Matrix> lu(s.K);
  if (!lu.isInvertible()) {
    throw SingularSystemError("solve_dense: operator is numerically singular (rank " +
                              std::to_string(lu.rank()) + " of " + std::to_string(s.K.rows()) +
                              ", rcond " + std::to_string(lu.rcond()) + ")");
  }
  return lu.solve(rhs);
}

inline DenseSolution unpack(const DenseSaddleSystem& s, const Vector& x) {
  const auto sh = edge_shape(s.grid, s.bc);
  DenseSolution out;
  out.field = EdgeField{s.bc, unvec(x.head(s.nu), sh.u_rows, sh.u_cols),
                        unvec(x.segment(s.nu, s.nv), sh.v_rows, sh.v_cols)};
  if (s.np > 0) {
    Vector p = Vector::Zero(s.p_rows * s.p_cols);
    if (s.grounded) {
      p.tail(s.np) = x.tail(s.np);
    } else {
      p = x.tail(s.np);
    }
    out.P = unvec(p, s.p_rows, s.p_cols);
  }
  return out;
}

/// Assemble, solve and unpack in one call.
inline DenseSolution oracle_solve(const Grid& g, Bc bc, Variant variant, double alpha,
                                  const EdgeField& rhs, const Matrix& H = {}) {
  const auto s = assemble_dense(g, bc, variant, alpha);
  return unpack(s, solve_dense(s, dense_rhs(s, rhs, H)));
}

/// Dense matrix of the data-compatibility map (F, G) -> B F + G B^T (or the
/// natural analogue), acting on [vec F; vec G].
inline Matrix compatibility_matrix(const Grid& g, Bc bc) {
  const GridOperators ops(g);
  Matrix L;
  if (bc == Bc::Essential) {
    const Matrix By(ops.y.B), Bx(ops.x.B);
    const Matrix left = kron(By, Matrix::Identity(g.nx - 1, g.nx - 1));
    const Matrix right = kron(Matrix::Identity(g.ny - 1, g.ny - 1), Bx);
    L.resize(left.rows(), left.cols() + right.cols());
    L << left, right;
  } else {
    const Matrix By(ops.y.Bb), Bx(ops.x.Bb);
    const Matrix left = kron(By.transpose(), Matrix::Identity(g.nx + 1, g.nx + 1));
    const Matrix right = kron(Matrix::Identity(g.ny + 1, g.ny + 1), Bx.transpose());
    L.resize(left.rows(), left.cols() + right.cols());
    L << left, right;
  }
  return L;
}

/// Random right-hand side with independent standard normal entries.
inline EdgeField random_rhs(const Grid& g, Bc bc, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  EdgeField f = EdgeField::zeros(g, bc);
  for (Eigen::Index k = 0; k < f.U.size(); ++k) f.U.data()[k] = nd(rng);
  for (Eigen::Index k = 0; k < f.V.size(); ++k) f.V.data()[k] = nd(rng);
  return f;
}

/// Random right-hand side projected onto the compatible subspace
/// (discretely divergence-free data).
inline EdgeField random_compatible_rhs(const Grid& g, Bc bc, std::mt19937_64& rng) {
  EdgeField f = random_rhs(g, bc, rng);
  const Matrix L = compatibility_matrix(g, bc);
  Vector r(f.U.size() + f.V.size());
  r << vec(f.U), vec(f.V);
  const Matrix Lt = L.transpose();
  const Vector y = Eigen::CompleteOrthogonalDecomposition<Matrix>(Lt).solve(r);
  r -= Lt * y;
  f.U = unvec(r.head(f.U.size()), f.U.rows(), f.U.cols());
  f.V = unvec(r.tail(f.V.size()), f.V.rows(), f.V.cols());
  return f;
}

/// Relative max-norm difference of two fields (and optional multipliers).
inline double relative_difference(const EdgeField& a, const EdgeField& b) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  const double d = std::max(max_abs(a.U - b.U), max_abs(a.V - b.V));
  return scale > 0.0 ? d / scale : d;
}

}  // namespace fastmaxwell
