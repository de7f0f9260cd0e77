#pragma once

// Matrix-free CG / PCG for curl(beta rot u) + alpha u = f with essential
// conditions. The operator carries the same hx*hy scaling as the constant
// coefficient system, so the fast Gauss-law solve with (alpha0, beta0) is an
// exact inverse of its constant-coefficient counterpart.

#include "fastmaxwell/assembly.hpp"
#include "fastmaxwell/solvers.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <string_view>
#include <vector>

namespace fastmaxwell {

/// Galerkin operator of curl(beta rot .) + alpha . on the essential edge
/// space, evaluated cell by cell from precomputed quadrature moments.
class VariableCoeffOperator {
 public:
  template <class Beta, class Alpha>
  VariableCoeffOperator(const Grid& g, Beta&& beta, Alpha&& alpha) : grid_(g) {
    g.validate();
    const auto& q = gauss3();
    const std::size_t cells = static_cast<std::size_t>(g.nx) * g.ny;
    cell_.resize(cells);
    int bad = 0;
#pragma omp parallel for schedule(static)
    for (int l = 0; l < g.ny; ++l) {
      for (int k = 0; k < g.nx; ++k) {
        CellData c;
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            const double x = (k + q.x[a]) * g.hx(), y = (l + q.x[b]) * g.hy();
            const double w = q.w[a] * q.w[b];
            const double bv = beta(x, y), av = alpha(x, y);
            if (!(bv > 0.0) || !std::isfinite(av)) {
#pragma omp atomic write
              bad = 1;
            }
            const double px = q.x[a], py = q.x[b];
            c.beta += w * bv;
            c.ull += w * av * (1 - px) * (1 - px);
            c.ulr += w * av * (1 - px) * px;
            c.urr += w * av * px * px;
            c.vbb += w * av * (1 - py) * (1 - py);
            c.vbt += w * av * (1 - py) * py;
            c.vtt += w * av * py * py;
          }
        }
        cell_[static_cast<std::size_t>(l) * g.nx + k] = c;
      }
    }
    if (bad) throw PreconditionError("VariableCoeffOperator: beta must be positive and alpha finite");
  }

  const Grid& grid() const { return grid_; }

  /// y = K x on the essential layout.
  EdgeField apply(const EdgeField& x) const {
    require_edge_layout(grid_, Bc::Essential, x.U, x.V, "VariableCoeffOperator::apply");
    const EdgeField f = embed_full(x);
    EdgeField y = EdgeField::zeros(grid_, Bc::Natural);
    const double hx = grid_.hx(), hy = grid_.hy();
    const double mu = hx * hx, mv = hy * hy;
    detail::for_each_cell_row_colored(grid_.ny, [&](int l) {
      for (int k = 0; k < grid_.nx; ++k) {
        const CellData& c = cell_[static_cast<std::size_t>(l) * grid_.nx + k];
        const double ul = f.U(l, k), ur = f.U(l, k + 1);
        const double vb = f.V(l, k), vt = f.V(l + 1, k);
        // rot u_h * hx * hy on this cell; beta is the cell mean
        const double d = c.beta * ((ur - ul) - (vt - vb));
        y.U(l, k) += -d + mu * (c.ull * ul + c.ulr * ur);
        y.U(l, k + 1) += d + mu * (c.ulr * ul + c.urr * ur);
        y.V(l, k) += d + mv * (c.vbb * vb + c.vbt * vt);
        y.V(l + 1, k) += -d + mv * (c.vbt * vb + c.vtt * vt);
      }
    });
    return restrict_interior(y);
  }

 private:
  struct CellData {
    double beta = 0;                 // mean of beta over the cell
    double ull = 0, ulr = 0, urr = 0;  // mean of alpha * hat products in x
    double vbb = 0, vbt = 0, vtt = 0;  // mean of alpha * hat products in y
  };
  Grid grid_;
  std::vector<CellData> cell_;
};

enum class Preconditioner { None, ConstantCoeffFast };

inline std::string_view to_string(Preconditioner p) {
  return p == Preconditioner::None ? "none" : "fast";
}

struct KrylovConfig {
  double tol = 1e-14;  // on ||r_k|| / ||b||
  int max_iter = 100000;
  Preconditioner preconditioner = Preconditioner::None;
  double alpha0 = 1.0;
  double beta0 = 1.0;
  bool keep_history = true;
  // called with (k, x_k) after every update; optional
  std::function<void(int, const EdgeField&)> on_iterate;
};

struct KrylovResult {
  EdgeField x;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;  // non-positive curvature met
  double relative_residual = 0.0;
  std::vector<double> history;  // ||r_k|| / ||b|| for k = 0..iterations
  double seconds = 0.0;
};

namespace detail {

// Fixed-block pairwise-free dot product: block partials in parallel, summed
// in block order, so the result does not depend on the thread count.
inline double blocked_dot(const double* a, const double* b, Eigen::Index n) {
  constexpr Eigen::Index block = 4096;
  const Eigen::Index nb = (n + block - 1) / block;
  std::vector<double> part(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < nb; ++k) {
    const Eigen::Index lo = k * block, hi = std::min(n, lo + block);
    double s = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i) s += a[i] * b[i];
    part[static_cast<std::size_t>(k)] = s;
  }
  double s = 0.0;
  for (double v : part) s += v;
  return s;
}

inline double dot(const EdgeField& a, const EdgeField& b) {
  return blocked_dot(a.U.data(), b.U.data(), a.U.size()) +
         blocked_dot(a.V.data(), b.V.data(), a.V.size());
}

inline void axpy(EdgeField& y, double a, const EdgeField& x) {
  y.U += a * x.U;
  y.V += a * x.V;
}

}  // namespace detail

/// Inner product used by the Krylov solvers (Euclidean on coefficients).
inline double krylov_dot(const EdgeField& a, const EdgeField& b) { return detail::dot(a, b); }

/// Preconditioned conjugate gradients. rhs is the scaled load hx*hy*F.
inline KrylovResult pcg(const VariableCoeffOperator& op, const EdgeField& rhs, const KrylovConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw PreconditionError("pcg: tol must be positive");
  const Grid& g = op.grid();
  require_edge_layout(g, Bc::Essential, rhs.U, rhs.V, "pcg");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  std::optional<FastSolver> fast;
  SolveConfig pc;
  if (cfg.preconditioner == Preconditioner::ConstantCoeffFast) {
    if (!(cfg.beta0 > 0.0) || !(cfg.alpha0 > 0.0)) {
      throw PreconditionError("pcg: preconditioner needs alpha0 > 0 and beta0 > 0");
    }
    fast.emplace(g, Bc::Essential);
    pc.bc = Bc::Essential;
    pc.variant = Variant::GaussLaw;
    pc.alpha = cfg.alpha0 / cfg.beta0;
  }
  const double area = g.hx() * g.hy();
  auto precondition = [&](const EdgeField& r) {
    if (!fast) return r;
    // K0 z = r with K0 = beta0 (curl-curl + (alpha0/beta0) mass); the fast
    // solver takes the unscaled load r / (hx hy).
    EdgeField load{Bc::Essential, r.U / (area * cfg.beta0), r.V / (area * cfg.beta0)};
    return fast->solve(load, pc);
  };

  KrylovResult res;
  res.x = EdgeField::zeros(g, Bc::Essential);
  const double bnorm = std::sqrt(detail::dot(rhs, rhs));
  if (cfg.keep_history) res.history.push_back(bnorm > 0 ? 1.0 : 0.0);
  if (bnorm == 0.0) {
    res.converged = true;
    res.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return res;
  }
  EdgeField r = rhs;
  EdgeField z = precondition(r);
  EdgeField p = z;
  double rz = detail::dot(r, z);
  double rel = 1.0;
  int it = 0;
  while (it < cfg.max_iter) {
    const EdgeField ap = op.apply(p);
    const double pap = detail::dot(p, ap);
    if (!(pap > 0.0)) {
      res.breakdown = true;
      break;
    }
    const double a = rz / pap;
    detail::axpy(res.x, a, p);
    detail::axpy(r, -a, ap);
    ++it;
    if (cfg.on_iterate) cfg.on_iterate(it, res.x);
    rel = std::sqrt(detail::dot(r, r)) / bnorm;
    if (cfg.keep_history) res.history.push_back(rel);
    if (rel <= cfg.tol) {
      res.converged = true;
      break;
    }
    z = precondition(r);
    const double rz_new = detail::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    p.U = z.U + beta * p.U;
    p.V = z.V + beta * p.V;
  }
  res.iterations = it;
  res.relative_residual = rel;
  res.seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return res;
}

/// Unpreconditioned conjugate gradients.
inline KrylovResult cg(const VariableCoeffOperator& op, const EdgeField& rhs, KrylovConfig cfg) {
  cfg.preconditioner = Preconditioner::None;
  return pcg(op, rhs, cfg);
}

}  // namespace fastmaxwell
