#pragma once

// Closed-form discrete eigen-decompositions of the curl-curl operator.
//
// tau_i = -2 sin(i pi / 2n), sigma_i = 2 (2 + cos(i pi / n)), i = 0..n, so that
// S^-1 A S = diag(tau^2), S^-1 D S = diag(sigma) and S^-1 B C = [0, diag(tau)].

#include "fastmaxwell/grid.hpp"
#include "fastmaxwell/operators.hpp"
#include "fastmaxwell/transforms.hpp"

#include <cmath>
#include <string_view>
#include <vector>

namespace fastmaxwell {

struct SpectralScalars {
  int n = 0;
  std::vector<double> tau;    // 0..n
  std::vector<double> sigma;  // 0..n
};

inline SpectralScalars spectral_scalars(int n) {
  require_partition(n, "spectral_scalars");
  SpectralScalars s;
  s.n = n;
  s.tau.resize(n + 1);
  s.sigma.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    s.tau[i] = -2.0 * std::sin(i * pi / (2.0 * n));
    s.sigma[i] = 2.0 * (2.0 + std::cos(i * pi / n));
  }
  s.tau[0] = 0.0;
  return s;
}

/// Gamma = [0, diag(tau_1..tau_{n-1})], (n-1) x n.
inline Matrix gamma_matrix(int n) {
  const auto s = spectral_scalars(n);
  Matrix g = Matrix::Zero(n - 1, n);
  for (int i = 1; i < n; ++i) g(i - 1, i) = s.tau[i];
  return g;
}

/// Gamma bar = [0, diag(tau_1..tau_n)], n x (n+1).
inline Matrix gamma_bar_matrix(int n) {
  const auto s = spectral_scalars(n);
  Matrix g = Matrix::Zero(n, n + 1);
  for (int i = 1; i <= n; ++i) g(i - 1, i) = s.tau[i];
  return g;
}

/// Discrete eigenvalue of the divergence-free mode (i, j) on an n x n grid.
inline double discrete_eigenvalue(int n, int i, int j) {
  const auto s = spectral_scalars(n);
  const double h = 1.0 / n;
  return 6.0 / (h * h) *
         (s.tau[i] * s.tau[i] / s.sigma[i] + s.tau[j] * s.tau[j] / s.sigma[j]);
}

/// Smallest nonzero discrete eigenvalue, mode (0, 1); tends to pi^2.
inline double smallest_eigenvalue(int n) { return discrete_eigenvalue(n, 0, 1); }

enum class Family { DivergenceFree, CurlFree };

inline std::string_view to_string(Family f) {
  return f == Family::DivergenceFree ? "divergence_free" : "curl_free";
}

struct EigenPair {
  double lambda = 0.0;
  int i = 0;  // y-mode
  int j = 0;  // x-mode
  Family family = Family::DivergenceFree;
  EdgeField field;
};

namespace detail {

// Basis vectors used by the eigenfields, index k = 0..n.
//   s_k(m)  = sin(k m pi / n),                 m = 1..n-1
//   c_k(m)  = nu_k cos((2m-1) k pi / 2n),       m = 1..n
//   sb_k(m) = nu_k sin((2m-1) k pi / 2n),       m = 1..n
//   ct_k(m) = nu_k cos(m k pi / n),             m = 0..n
inline Vector basis_s(int n, int k) {
  Vector v(n - 1);
  for (int m = 1; m < n; ++m) v(m - 1) = std::sin(static_cast<double>(k) * m * pi / n);
  return v;
}
inline Vector basis_c(int n, int k) {
  const double nu = (k == 0 || k == n) ? std::sqrt(0.5) : 1.0;
  Vector v(n);
  for (int m = 1; m <= n; ++m) v(m - 1) = nu * std::cos((2.0 * m - 1) * k * pi / (2.0 * n));
  return v;
}
inline Vector basis_sb(int n, int k) {
  const double nu = (k == 0 || k == n) ? std::sqrt(0.5) : 1.0;
  Vector v(n);
  for (int m = 1; m <= n; ++m) v(m - 1) = nu * std::sin((2.0 * m - 1) * k * pi / (2.0 * n));
  return v;
}
inline Vector basis_ct(int n, int k) {
  const double nu = (k == 0 || k == n) ? std::sqrt(0.5) : 1.0;
  Vector v(n + 1);
  for (int m = 0; m <= n; ++m) v(m) = nu * std::cos(static_cast<double>(m) * k * pi / n);
  return v;
}

}  // namespace detail

/// Lazily materialized catalog of all eigenpairs for (n, bc). Only the
/// mode list is stored; fields are built on access.
class EigenCatalog {
 public:
  struct Mode {
    int i, j;
    Family family;
  };

  EigenCatalog(int n, Bc bc) : n_(n), bc_(bc), s_(spectral_scalars(n)) {
    if (bc == Bc::Essential) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != 0 || j != 0) modes_.push_back({i, j, Family::DivergenceFree});
      for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) modes_.push_back({i, j, Family::CurlFree});
    } else {
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) modes_.push_back({i, j, Family::DivergenceFree});
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
          if (i != 0 || j != 0) modes_.push_back({i, j, Family::CurlFree});
    }
  }

  int n() const { return n_; }
  Bc bc() const { return bc_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<Mode>& modes() const { return modes_; }

  std::size_t count(Family f) const {
    std::size_t c = 0;
    for (const auto& m : modes_) c += m.family == f;
    return c;
  }

  EigenPair operator[](std::size_t k) const { return make(modes_.at(k)); }

  EigenPair make(const Mode& m) const {
    const int n = n_;
    const double ti = s_.tau[m.i], tj = s_.tau[m.j];
    const double si = s_.sigma[m.i], sj = s_.sigma[m.j];
    EigenPair p;
    p.i = m.i;
    p.j = m.j;
    p.family = m.family;
    p.lambda = m.family == Family::DivergenceFree ? discrete_eigenvalue(n, m.i, m.j) : 0.0;
    p.field.bc = bc_;
    const bool div = m.family == Family::DivergenceFree;
    if (bc_ == Bc::Essential) {
      const Vector ci = detail::basis_c(n, m.i), cj = detail::basis_c(n, m.j);
      const Vector si_v = detail::basis_s(n, m.i), sj_v = detail::basis_s(n, m.j);
      p.field.U = (div ? tj * si : ti) * ci * sj_v.transpose();
      p.field.V = (div ? -ti * sj : tj) * si_v * cj.transpose();
    } else {
      const Vector sbi = detail::basis_sb(n, m.i), sbj = detail::basis_sb(n, m.j);
      const Vector cti = detail::basis_ct(n, m.i), ctj = detail::basis_ct(n, m.j);
      p.field.U = (div ? tj * si : ti) * sbi * ctj.transpose();
      p.field.V = (div ? -ti * sj : tj) * cti * sbj.transpose();
    }
    return p;
  }

 private:
  int n_;
  Bc bc_;
  SpectralScalars s_;
  std::vector<Mode> modes_;
};

inline EigenCatalog eigen_catalog(int n, Bc bc) { return EigenCatalog(n, bc); }

struct EigenResidual {
  double equations = 0.0;   // max-norm residual of both eigen-equations
  double divergence = 0.0;  // divergence residual (divergence-free family)
  double scale = 0.0;       // max|U|, max|V|
};

/// Substitutes an eigenpair into K x = (h^2/6) lambda M x.
inline EigenResidual verify_eigenpair(const EigenPair& p, const GridOperators& ops) {
  const double scale = p.field.max_abs();
  if (!(scale > 0.0)) throw PreconditionError("verify_eigenpair: zero field is not an eigenfield");
  const Grid& g = ops.grid;
  if (!g.is_square()) throw PreconditionError("verify_eigenpair: square grid required");
  const EdgeField k = apply_system(ops, p.field, 0.0);
  const EdgeField m = apply_system(ops, p.field, 1.0);  // K + (h^2/6) M
  // (h^2/6) M x = m - k
  const double mu = p.lambda;
  const Matrix ru = k.U - mu * (m.U - k.U);
  const Matrix rv = k.V - mu * (m.V - k.V);
  EigenResidual r;
  r.scale = scale;
  r.equations = std::max(max_abs(ru), max_abs(rv));
  if (p.family == Family::DivergenceFree) r.divergence = max_abs(discrete_divergence(ops, p.field));
  return r;
}

/// Mass (L2) inner product of two edge fields of the same layout.
inline double mass_inner(const GridOperators& ops, const EdgeField& a, const EdgeField& b) {
  const Grid& g = ops.grid;
  const bool ess = a.bc == Bc::Essential;
  const auto& dx = ess ? ops.x.D : ops.x.Db;
  const auto& dy = ess ? ops.y.D : ops.y.Db;
  const double su = (a.U.cwiseProduct(b.U * dx)).sum();
  const double sv = (a.V.cwiseProduct(dy * b.V)).sum();
  return g.hx() / (6.0 * g.hy()) * su + g.hy() / (6.0 * g.hx()) * sv;
}

/// Scales an eigenfield to unit L2 norm.
inline EdgeField normalize_mass(const GridOperators& ops, EdgeField f) {
  const double nrm = std::sqrt(mass_inner(ops, f, f));
  if (!(nrm > 0.0)) throw PreconditionError("normalize_mass: zero field");
  f.U /= nrm;
  f.V /= nrm;
  return f;
}

}  // namespace fastmaxwell
