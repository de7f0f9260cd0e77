#pragma once

// Fast direct solvers in the trigonometric eigenbasis.
//
// Essential layout:  Uh = C^T U S,       Vh = S V C,       Ph = S P S
// Natural layout:    Uh = Sb^T U Mb^-1 Cb, Vh = Cb Mb^-1 V Sb
// Right-hand sides go through the transposed maps (Fh = C^T F S,
// Fh = Sb^T F Mb Cb, ...). In spectral space every mode (i, j) with y-mode i
// and x-mode j decouples into at most a 3x3 system:
//   ex a - t b - (hx^2/6) ty sx p     = hx hy Fh
//   -t a + ey b - (hy^2/6) sy tx p    = hx hy Gh
//   hx^2 ty sx a + hy^2 sy tx b       = 6 hx hy Hh
// with ex = tx^2 + a hx^2 sx / 6, ey = ty^2 + a hy^2 sy / 6, t = tx ty.

#include "fastmaxwell/grid.hpp"
#include "fastmaxwell/spectral.hpp"
#include "fastmaxwell/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastmaxwell {

enum class Variant { DivergenceConstrained, GaussLaw, GeneralWithMultiplier };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::DivergenceConstrained: return "divergence";
    case Variant::GaussLaw: return "gauss";
    case Variant::GeneralWithMultiplier: return "general";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "divergence") return Variant::DivergenceConstrained;
  if (s == "gauss") return Variant::GaussLaw;
  if (s == "general") return Variant::GeneralWithMultiplier;
  throw PreconditionError("unknown solver variant '" + std::string(s) + "'");
}

struct SolveConfig {
  double alpha = 1.0;
  Bc bc = Bc::Essential;
  Variant variant = Variant::DivergenceConstrained;
  double resonance_tol = 1e-12;
  /// Derive the second component from the first through the discrete
  /// constraint instead of transforming G (divergence variant only).
  bool shortcut = false;
};

struct SpectralField {
  Matrix Uhat;
  Matrix Vhat;
  Matrix Phat;  // empty unless a multiplier is present
};

struct GeneralSolution {
  EdgeField field;
  Matrix P;
};

namespace detail {

// Per-row minimum and maximum of |denominator|, merged after the pass so the
// check does not depend on the thread count.
class ResonanceTracker {
 public:
  explicit ResonanceTracker(Eigen::Index rows)
      : min_(rows, std::numeric_limits<double>::infinity()), max_(rows, 0.0), arg_(rows, 0) {}

  struct Row {
    double mn = std::numeric_limits<double>::infinity();
    double mx = 0.0;
    int arg = 0;
    void add(int col, double d) {
      const double a = std::abs(d);
      if (!(a >= mn)) {  // also catches NaN
        mn = a;
        arg = col;
      }
      mx = std::max(mx, a);
    }
  };

  void store(Eigen::Index r, const Row& row) {
    min_[r] = row.mn;
    max_[r] = row.mx;
    arg_[r] = row.arg;
  }

  void check(double tol, int row_off, int col_off) const {
    double mx = 0.0;
    for (double v : max_) mx = std::max(mx, v);
    for (std::size_t r = 0; r < min_.size(); ++r) {
      if (!(min_[r] > tol * mx)) {
        throw ResonanceError(static_cast<int>(r) + row_off, arg_[r] + col_off, min_[r], mx);
      }
    }
  }

 private:
  std::vector<double> min_, max_;
  std::vector<int> arg_;
};

inline void scale_rows_ends(Matrix& x, double s) {
  x.row(0) *= s;
  x.row(x.rows() - 1) *= s;
}

inline void scale_cols_ends(Matrix& x, double s) {
  x.col(0) *= s;
  x.col(x.cols() - 1) *= s;
}

}  // namespace detail

/// Fast solver bound to one grid and boundary condition. Owns its transform
/// plans; independent instances may run on different threads.
class FastSolver {
 public:
  FastSolver(const Grid& g, Bc bc, Backend backend = Backend::Fast)
      : grid_(g), bc_(bc), sx_(spectral_scalars(g.nx)), sy_(spectral_scalars(g.ny)) {
    g.validate();
    const int nx = g.nx, ny = g.ny;
    using K = TransformKind;
    if (bc == Bc::Essential) {
      u_fwd_ = {TransformPlan(K::DCT2, ny, Axis::Cols, backend), TransformPlan(K::DST1, nx, Axis::Rows, backend)};
      u_inv_ = {TransformPlan(K::DCT3, ny, Axis::Cols, backend), TransformPlan(K::DST1, nx, Axis::Rows, backend)};
      v_fwd_ = {TransformPlan(K::DST1, ny, Axis::Cols, backend), TransformPlan(K::DCT2, nx, Axis::Rows, backend)};
      v_inv_ = {TransformPlan(K::DST1, ny, Axis::Cols, backend), TransformPlan(K::DCT3, nx, Axis::Rows, backend)};
      p_ = {TransformPlan(K::DST1, ny, Axis::Cols, backend), TransformPlan(K::DST1, nx, Axis::Rows, backend)};
    } else {
      u_fwd_ = {TransformPlan(K::DST2, ny, Axis::Cols, backend), TransformPlan(K::DCT1, nx, Axis::Rows, backend)};
      u_inv_ = {TransformPlan(K::DST3, ny, Axis::Cols, backend), TransformPlan(K::DCT1, nx, Axis::Rows, backend)};
      v_fwd_ = {TransformPlan(K::DCT1, ny, Axis::Cols, backend), TransformPlan(K::DST2, nx, Axis::Rows, backend)};
      v_inv_ = {TransformPlan(K::DCT1, ny, Axis::Cols, backend), TransformPlan(K::DST3, nx, Axis::Rows, backend)};
    }
  }

  const Grid& grid() const { return grid_; }
  Bc bc() const { return bc_; }

  /// Divergence-constrained or Gauss-law solve.
  EdgeField solve(const EdgeField& rhs, const SolveConfig& cfg) const {
    check_config(cfg);
    require_edge_layout(grid_, bc_, rhs.U, rhs.V, "FastSolver::solve");
    if (rhs.bc != bc_) throw PreconditionError("FastSolver::solve: right-hand side has the wrong layout");
    if (cfg.variant == Variant::GeneralWithMultiplier) {
      throw PreconditionError("FastSolver::solve: use solve_general for the multiplier variant");
    }
    EdgeField out{bc_, rhs.U, rhs.V};
    if (cfg.variant == Variant::DivergenceConstrained) {
      if (cfg.shortcut) {
        solve_shortcut(out, cfg);
      } else {
        solve_u_inplace(out.U, cfg);
        solve_v_inplace(out.V, cfg);
      }
      return out;
    }
    forward_u(out.U);
    forward_v(out.V);
    gauss_modes(out.U, out.V, cfg);
    inverse_u(out.U);
    inverse_v(out.V);
    return out;
  }

  /// Divergence-constrained solve of the first component only, overwriting F
  /// with U. The two components decouple, which keeps peak memory at one
  /// matrix for very large grids.
  void solve_u_inplace(Matrix& F, const SolveConfig& cfg) const {
    check_config(cfg);
    const auto s = edge_shape(grid_, bc_);
    require_shape(F, s.u_rows, s.u_cols, "solve_u_inplace");
    forward_u(F);
    divergence_modes_u(F, cfg);
    inverse_u(F);
  }

  /// Second-component counterpart of solve_u_inplace.
  void solve_v_inplace(Matrix& G, const SolveConfig& cfg) const {
    check_config(cfg);
    const auto s = edge_shape(grid_, bc_);
    require_shape(G, s.v_rows, s.v_cols, "solve_v_inplace");
    forward_v(G);
    divergence_modes_v(G, cfg);
    inverse_v(G);
  }

  /// Solve with a Lagrange multiplier P for div u = rho (essential only).
  /// H holds the nodal moments of rho.
  GeneralSolution solve_general(const EdgeField& rhs, const Matrix& H, const SolveConfig& cfg) const {
    SolveConfig c = cfg;
    c.variant = Variant::GeneralWithMultiplier;
    check_config(c);
    require_edge_layout(grid_, bc_, rhs.U, rhs.V, "solve_general");
    require_shape(H, grid_.ny - 1, grid_.nx - 1, "solve_general(H)");
    GeneralSolution out{EdgeField{bc_, rhs.U, rhs.V}, H};
    forward_u(out.field.U);
    forward_v(out.field.V);
    p_[0].apply(out.P);
    p_[1].apply(out.P);
    general_modes(out.field.U, out.field.V, out.P, c);
    inverse_u(out.field.U);
    inverse_v(out.field.V);
    p_[0].apply(out.P);
    p_[1].apply(out.P);
    return out;
  }

  /// Transformed right-hand side (Fh, Gh), exposed for tests.
  SpectralField forward_rhs(const EdgeField& rhs) const {
    require_edge_layout(grid_, bc_, rhs.U, rhs.V, "forward_rhs");
    SpectralField s{rhs.U, rhs.V, {}};
    forward_u(s.Uhat);
    forward_v(s.Vhat);
    return s;
  }

  /// Spectral coefficients (Uh, Vh) of an edge field.
  SpectralField analyze(const EdgeField& f) const {
    require_edge_layout(grid_, bc_, f.U, f.V, "analyze");
    SpectralField s{f.U, f.V, {}};
    if (bc_ == Bc::Natural) {
      detail::scale_cols_ends(s.Uhat, std::sqrt(0.5));
      detail::scale_rows_ends(s.Vhat, std::sqrt(0.5));
    }
    u_fwd_[0].apply(s.Uhat);
    u_fwd_[1].apply(s.Uhat);
    v_fwd_[0].apply(s.Vhat);
    v_fwd_[1].apply(s.Vhat);
    return s;
  }

 private:
  void check_config(const SolveConfig& cfg) const {
    if (cfg.bc != bc_) throw PreconditionError("FastSolver: configuration boundary condition does not match the solver");
    if (!(cfg.resonance_tol >= 0.0)) throw PreconditionError("FastSolver: resonance_tol must be non-negative");
    if (cfg.variant == Variant::GaussLaw && cfg.alpha == 0.0) {
      throw PreconditionError("FastSolver: the Gauss-law variant needs alpha != 0");
    }
    if (cfg.variant == Variant::GeneralWithMultiplier && bc_ != Bc::Essential) {
      throw PreconditionError("FastSolver: the multiplier variant is only available for essential conditions");
    }
  }

  double inv_scale() const { return 4.0 / (static_cast<double>(grid_.nx) * grid_.ny); }

  // Forward maps for right-hand sides; inverse maps produce coefficients.
  void forward_u(Matrix& x) const {
    if (bc_ == Bc::Natural) detail::scale_cols_ends(x, std::sqrt(2.0));
    u_fwd_[0].apply(x);
    u_fwd_[1].apply(x);
  }
  void forward_v(Matrix& x) const {
    if (bc_ == Bc::Natural) detail::scale_rows_ends(x, std::sqrt(2.0));
    v_fwd_[0].apply(x);
    v_fwd_[1].apply(x);
  }
  void inverse_u(Matrix& x) const {
    u_inv_[0].apply(x);
    u_inv_[1].apply(x);
    if (bc_ == Bc::Natural) detail::scale_cols_ends(x, std::sqrt(2.0));
  }
  void inverse_v(Matrix& x) const {
    v_inv_[0].apply(x);
    v_inv_[1].apply(x);
    if (bc_ == Bc::Natural) detail::scale_rows_ends(x, std::sqrt(2.0));
  }

  // Mode offsets of the spectral layouts.
  int u_row_off() const { return bc_ == Bc::Essential ? 0 : 1; }
  int u_col_off() const { return bc_ == Bc::Essential ? 1 : 0; }
  int v_row_off() const { return bc_ == Bc::Essential ? 1 : 0; }
  int v_col_off() const { return bc_ == Bc::Essential ? 0 : 1; }

  double ex(int j, double alpha) const {
    const double hx = grid_.hx();
    return sx_.tau[j] * sx_.tau[j] + alpha * hx * hx * sx_.sigma[j] / 6.0;
  }
  double ey(int i, double alpha) const {
    const double hy = grid_.hy();
    return sy_.tau[i] * sy_.tau[i] + alpha * hy * hy * sy_.sigma[i] / 6.0;
  }

  // Divergence-constrained first component:
  //   a = hx hy Fh / (ex + (hx/hy)^2 ty^2 sx / sy),
  // natural gauge a(:, x-mode 0) = 0.
  void divergence_modes_u(Matrix& x, const SolveConfig& cfg) const {
    const double hx = grid_.hx(), hy = grid_.hy();
    const double r2 = (hx * hx) / (hy * hy);
    const double coef = hx * hy * inv_scale();
    const int ro = u_row_off(), co = u_col_off();
    std::vector<double> exv(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) exv[c] = ex(static_cast<int>(c) + co, cfg.alpha);
    detail::ResonanceTracker tracker(x.rows());
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const int i = static_cast<int>(r) + ro;
      const double qy = r2 * sy_.tau[i] * sy_.tau[i] / sy_.sigma[i];
      detail::ResonanceTracker::Row row;
      double* p = x.data() + r * x.cols();
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const int j = static_cast<int>(c) + co;
        if (bc_ == Bc::Natural && j == 0) {
          p[c] = 0.0;
          continue;
        }
        const double den = exv[c] + qy * sx_.sigma[j];
        row.add(static_cast<int>(c), den);
        p[c] *= coef / den;
      }
      tracker.store(r, row);
    }
    tracker.check(cfg.resonance_tol, ro, co);
  }

  // b = hx hy Gh / (ey + (hy/hx)^2 tx^2 sy / sx), natural gauge b(y-mode 0, :) = 0.
  void divergence_modes_v(Matrix& x, const SolveConfig& cfg) const {
    const double hx = grid_.hx(), hy = grid_.hy();
    const double r2 = (hy * hy) / (hx * hx);
    const double coef = hx * hy * inv_scale();
    const int ro = v_row_off(), co = v_col_off();
    std::vector<double> qx(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const int j = static_cast<int>(c) + co;
      qx[c] = r2 * sx_.tau[j] * sx_.tau[j] / sx_.sigma[j];
    }
    detail::ResonanceTracker tracker(x.rows());
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const int i = static_cast<int>(r) + ro;
      double* p = x.data() + r * x.cols();
      detail::ResonanceTracker::Row row;
      if (bc_ == Bc::Natural && i == 0) {
        std::fill(p, p + x.cols(), 0.0);
        tracker.store(r, row);
        continue;
      }
      const double eyi = ey(i, cfg.alpha);
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double den = eyi + qx[c] * sy_.sigma[i];
        row.add(static_cast<int>(c), den);
        p[c] *= coef / den;
      }
      tracker.store(r, row);
    }
    tracker.check(cfg.resonance_tol, ro, co);
  }

  // Shortcut: b follows from a through the spectral constraint
  //   hx^2 ty sx a + hy^2 sy tx b = 0,
  // so only the x-mode-0 column of Gh (essential) is transformed.
  void solve_shortcut(EdgeField& f, const SolveConfig& cfg) const {
    const double hx = grid_.hx(), hy = grid_.hy();
    Matrix g0;
    if (bc_ == Bc::Essential) {
      // Gh(:, 0) = S (G c_0) with c_0 = (1/sqrt2) ones.
      g0 = std::sqrt(0.5) * f.V.rowwise().sum();
      v_fwd_[0].apply(g0);
    }
    forward_u(f.U);
    divergence_modes_u(f.U, cfg);
    Matrix vh = Matrix::Zero(f.V.rows(), f.V.cols());
    const int uro = u_row_off(), uco = u_col_off(), vro = v_row_off(), vco = v_col_off();
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < vh.rows(); ++r) {
      const int i = static_cast<int>(r) + vro;
      if (i == 0) continue;
      const double ki = -hx * hx * sy_.tau[i] / (hy * hy * sy_.sigma[i]);
      for (Eigen::Index c = 0; c < vh.cols(); ++c) {
        const int j = static_cast<int>(c) + vco;
        if (j == 0) continue;
        vh(r, c) = ki * sx_.sigma[j] / sx_.tau[j] * f.U(i - uro, j - uco);
      }
    }
    if (bc_ == Bc::Essential) {
      const double coef = hx * hy * inv_scale();
      detail::ResonanceTracker tracker(1);
      detail::ResonanceTracker::Row row;
      for (Eigen::Index r = 0; r < vh.rows(); ++r) {
        const double den = ey(static_cast<int>(r) + vro, cfg.alpha);
        row.add(static_cast<int>(r), den);
        vh(r, 0) = coef * g0(r, 0) / den;
      }
      tracker.store(0, row);
      tracker.check(cfg.resonance_tol, 0, 0);
    }
    inverse_u(f.U);
    inverse_v(vh);
    f.V = std::move(vh);
  }

  // Gauss-law variant: full 2x2 solve per paired mode, 1x1 for the rest.
  void gauss_modes(Matrix& fu, Matrix& gv, const SolveConfig& cfg) const {
    const double hx = grid_.hx(), hy = grid_.hy();
    const double coef = hx * hy * inv_scale();
    const double alpha = cfg.alpha;
    const int uro = u_row_off(), uco = u_col_off(), vro = v_row_off(), vco = v_col_off();
    // Unpaired modes first (essential: Uh y-mode 0, Vh x-mode 0; natural:
    // Uh x-mode 0, Vh y-mode 0). Their partner coefficient multiplies tau_0 = 0.
    detail::ResonanceTracker single(1);
    detail::ResonanceTracker::Row srow;
    if (bc_ == Bc::Essential) {
      for (Eigen::Index c = 0; c < fu.cols(); ++c) {
        const double den = ex(static_cast<int>(c) + uco, alpha);
        srow.add(static_cast<int>(c), den);
        fu(0, c) *= coef / den;
      }
      for (Eigen::Index r = 0; r < gv.rows(); ++r) {
        const double den = ey(static_cast<int>(r) + vro, alpha);
        srow.add(static_cast<int>(r), den);
        gv(r, 0) *= coef / den;
      }
    } else {
      for (Eigen::Index r = 0; r < fu.rows(); ++r) {
        const double den = ex(0, alpha);
        srow.add(static_cast<int>(r), den);
        fu(r, 0) *= coef / den;
      }
      for (Eigen::Index c = 0; c < gv.cols(); ++c) {
        const double den = ey(0, alpha);
        srow.add(static_cast<int>(c), den);
        gv(0, c) *= coef / den;
      }
    }
    // Paired modes: i = 1..ny' and j = 1..nx' where the primes are ny-1, nx-1
    // (essential) or ny, nx (natural).
    const int imax = bc_ == Bc::Essential ? grid_.ny - 1 : grid_.ny;
    const int jmax = bc_ == Bc::Essential ? grid_.nx - 1 : grid_.nx;
    detail::ResonanceTracker tracker(imax);
#pragma omp parallel for schedule(static)
    for (int i = 1; i <= imax; ++i) {
      detail::ResonanceTracker::Row row;
      const double eyi = ey(i, alpha);
      for (int j = 1; j <= jmax; ++j) {
        const double exj = ex(j, alpha);
        const double t = sx_.tau[j] * sy_.tau[i];
        const double det = exj * eyi - t * t;
        row.add(j - 1, det);
        double& a = fu(i - uro, j - uco);
        double& b = gv(i - vro, j - vco);
        const double fa = a, gb = b;
        a = coef * (eyi * fa + t * gb) / det;
        b = coef * (t * fa + exj * gb) / det;
      }
      tracker.store(i - 1, row);
    }
    single.store(0, srow);
    single.check(cfg.resonance_tol, 0, 0);
    tracker.check(cfg.resonance_tol, 1, 1);
  }

  // Multiplier variant (essential layout only).
  void general_modes(Matrix& fu, Matrix& gv, Matrix& hp, const SolveConfig& cfg) const {
    const double hx = grid_.hx(), hy = grid_.hy();
    const double area = hx * hy;
    const double s = inv_scale();
    const double alpha = cfg.alpha;
    const double r2 = (hx * hx) / (hy * hy);
    detail::ResonanceTracker single(1);
    detail::ResonanceTracker::Row srow;
    for (Eigen::Index c = 0; c < fu.cols(); ++c) {  // Uh y-mode 0
      const double den = ex(static_cast<int>(c) + 1, alpha);
      srow.add(static_cast<int>(c), den);
      fu(0, c) *= area * s / den;
    }
    for (Eigen::Index r = 0; r < gv.rows(); ++r) {  // Vh x-mode 0
      const double den = ey(static_cast<int>(r) + 1, alpha);
      srow.add(static_cast<int>(r), den);
      gv(r, 0) *= area * s / den;
    }
    const int imax = grid_.ny - 1, jmax = grid_.nx - 1;
    detail::ResonanceTracker tracker(imax);
#pragma omp parallel for schedule(static)
    for (int i = 1; i <= imax; ++i) {
      detail::ResonanceTracker::Row row;
      const double ty = sy_.tau[i], sy = sy_.sigma[i];
      const double eyi = ey(i, alpha);
      for (int j = 1; j <= jmax; ++j) {
        const double tx = sx_.tau[j], sx = sx_.sigma[j];
        const double exj = ex(j, alpha);
        double& a = fu(i, j - 1);
        double& b = gv(i - 1, j);
        double& p = hp(i - 1, j - 1);
        const double fh = a, gh = b, hh = p;
        const double q = hx * hx * ty * ty * sx + hy * hy * tx * tx * sy;
        const double pv = 6.0 * area * (alpha * hh - ty * fh - tx * gh) / q;
        const double da = exj + r2 * ty * ty * sx / sy;
        const double db = eyi + (hy * hy) / (hx * hx) * tx * tx * sy / sx;
        row.add(j - 1, std::min(std::abs(da), std::abs(db)));
        a = s * (area * fh + 6.0 * hx * ty * hh / (hy * sy) + hx * hx / 6.0 * ty * sx * pv) / da;
        b = s * (area * gh + 6.0 * hy * tx * hh / (hx * sx) + hy * hy / 6.0 * tx * sy * pv) / db;
        p = s * pv;
      }
      tracker.store(i - 1, row);
    }
    single.store(0, srow);
    single.check(cfg.resonance_tol, 0, 0);
    tracker.check(cfg.resonance_tol, 1, 1);
  }

  Grid grid_;
  Bc bc_;
  SpectralScalars sx_, sy_;
  std::vector<TransformPlan> u_fwd_, u_inv_, v_fwd_, v_inv_, p_;
};

// Free-function entry points.

inline EdgeField solve_essential(const EdgeField& rhs, SolveConfig cfg) {
  cfg.bc = Bc::Essential;
  cfg.variant = Variant::DivergenceConstrained;
  return FastSolver(rhs.grid(), Bc::Essential).solve(rhs, cfg);
}

inline EdgeField solve_essential_gauss(const EdgeField& rhs, SolveConfig cfg) {
  cfg.bc = Bc::Essential;
  cfg.variant = Variant::GaussLaw;
  return FastSolver(rhs.grid(), Bc::Essential).solve(rhs, cfg);
}

inline EdgeField solve_natural(const EdgeField& rhs, SolveConfig cfg) {
  cfg.bc = Bc::Natural;
  cfg.variant = Variant::DivergenceConstrained;
  return FastSolver(rhs.grid(), Bc::Natural).solve(rhs, cfg);
}

inline EdgeField solve_natural_gauss(const EdgeField& rhs, SolveConfig cfg) {
  cfg.bc = Bc::Natural;
  cfg.variant = Variant::GaussLaw;
  return FastSolver(rhs.grid(), Bc::Natural).solve(rhs, cfg);
}

inline GeneralSolution solve_general(const EdgeField& rhs, const Matrix& H, SolveConfig cfg) {
  cfg.bc = Bc::Essential;
  cfg.variant = Variant::GeneralWithMultiplier;
  return FastSolver(rhs.grid(), Bc::Essential).solve_general(rhs, H, cfg);
}

}  // namespace fastmaxwell
