#pragma once

// Verification suites shared by the command-line tool and the test suites.
// Each returns named checks with the measured value and its threshold.

#include "fastmaxwell/io.hpp"
#include "fastmaxwell/operators.hpp"
#include "fastmaxwell/oracle.hpp"
#include "fastmaxwell/spectral.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <string>
#include <vector>

namespace fastmaxwell {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

inline Check make_check(std::string name, double value, double threshold) {
  return Check{std::move(name), value <= threshold, value, threshold};
}

enum class Fault { None, TauSign };

/// Transform and diagonalization identities at size n, as relative
/// max-norm deviations (scaled by n/2 where the identity carries it).
inline std::vector<Check> structure_identities(int n, double tol, Fault fault = Fault::None) {
  std::vector<Check> out;
  const std::string tag = " n=" + std::to_string(n);
  const double half = n / 2.0;
  const Matrix S = transform_matrix(TransformKind::DST1, n);
  const Matrix C = transform_matrix(TransformKind::DCT3, n);
  const Matrix Sb = transform_matrix(TransformKind::DST3, n);
  const Matrix Cb = transform_matrix(TransformKind::DCT1, n);
  const auto cm = coupling_matrices(n);
  const Matrix A(cm.A), D(cm.D), B(cm.B), Ab(cm.Ab), Db(cm.Db), Bb(cm.Bb), Mb(cm.Mb);
  auto sc = spectral_scalars(n);
  if (fault == Fault::TauSign)
    for (auto& t : sc.tau) t = -t;
  Matrix gamma = Matrix::Zero(n - 1, n), gammab = Matrix::Zero(n, n + 1);
  for (int i = 1; i < n; ++i) gamma(i - 1, i) = sc.tau[i];
  for (int i = 1; i <= n; ++i) gammab(i - 1, i) = sc.tau[i];
  Matrix lam2 = Matrix::Zero(n - 1, n - 1), sig = lam2;
  for (int i = 1; i < n; ++i) {
    lam2(i - 1, i - 1) = sc.tau[i] * sc.tau[i];
    sig(i - 1, i - 1) = sc.sigma[i];
  }
  Matrix lam2b = Matrix::Zero(n + 1, n + 1), sigb = lam2b;
  for (int i = 0; i <= n; ++i) {
    lam2b(i, i) = sc.tau[i] * sc.tau[i];
    sigb(i, i) = sc.sigma[i];
  }
  auto id = [](Eigen::Index m) { return Matrix::Identity(m, m); };
  const Matrix Sinv = S / half, Sbinv = Sb.transpose() / half;
  out.push_back(make_check("S*S = (n/2)I" + tag, max_abs(S * S - half * id(n - 1)) / half, tol));
  out.push_back(make_check("C^-1 = (2/n)C^T" + tag, max_abs(C * C.transpose() / half - id(n)), tol));
  out.push_back(make_check("Sb^-1 = (2/n)Sb^T" + tag, max_abs(Sb.transpose() * Sb / half - id(n)), tol));
  out.push_back(make_check("Cb^-1 = (2/n)Cb" + tag, max_abs(Cb * Cb / half - id(n + 1)), tol));
  out.push_back(make_check("S^-1 A S = Lambda^2" + tag, max_abs(Sinv * A * S - lam2), tol));
  out.push_back(make_check("S^-1 D S = Sigma" + tag, max_abs(Sinv * D * S - sig), tol));
  out.push_back(make_check("S^-1 B C = Gamma" + tag, max_abs(Sinv * B * C - gamma), tol));
  out.push_back(make_check("(2/n) Cb Mb Ab Mb Cb = Lambda^2" + tag,
                           max_abs(Cb * Mb * Ab * Mb * Cb / half - lam2b), tol));
  out.push_back(make_check("(2/n) Cb Mb Db Mb Cb = Sigma" + tag,
                           max_abs(Cb * Mb * Db * Mb * Cb / half - sigb), tol));
  out.push_back(make_check("Sb^-1 Bb Mb Cb = Gamma_bar" + tag, max_abs(Sbinv * Bb * Mb * Cb - gammab), tol));
  out.push_back(make_check("B B^T = A" + tag, max_abs(B * B.transpose() - A), tol));
  out.push_back(make_check("Gamma Gamma^T = Lambda^2" + tag, max_abs(gamma * gamma.transpose() - lam2), tol));
  return out;
}

/// Fast path against explicit matrix products for every transform kind,
/// along both axes.
inline std::vector<Check> transform_agreement(int n, double tol, std::uint64_t seed = 11) {
  std::vector<Check> out;
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (TransformKind k : all_transform_kinds) {
    const int len = transform_length(k, n);
    Matrix x(len, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = ud(rng);
    const Matrix xt = x.transpose();
    const Matrix ref = naive_transform(k, n, x, Axis::Cols);
    const Matrix refr = naive_transform(k, n, xt, Axis::Rows);
    const Matrix fc = TransformPlan(k, n, Axis::Cols).apply(std::as_const(x));
    const Matrix fr = TransformPlan(k, n, Axis::Rows).apply(xt);
    const double scale = std::max(max_abs(ref), 1e-300);
    const double err = std::max(max_abs(fc - ref), max_abs(fr - refr)) / scale;
    out.push_back(make_check(std::string("fast ") + std::string(to_string(k)) + " = naive n=" +
                                 std::to_string(n), err, tol));
  }
  return out;
}

struct OracleCase {
  Bc bc;
  Variant variant;
  bool shortcut;
  double alpha;
  std::string label;
};

inline std::vector<OracleCase> oracle_cases() {
  return {
      {Bc::Essential, Variant::DivergenceConstrained, false, 2.0, "essential/divergence"},
      {Bc::Essential, Variant::DivergenceConstrained, true, 0.5, "essential/divergence+shortcut"},
      {Bc::Essential, Variant::GaussLaw, false, 1.5, "essential/gauss"},
      {Bc::Essential, Variant::GeneralWithMultiplier, false, 1.0, "essential/general"},
      {Bc::Essential, Variant::GeneralWithMultiplier, false, 0.0, "essential/general alpha=0"},
      {Bc::Natural, Variant::DivergenceConstrained, false, 1.0, "natural/divergence"},
      {Bc::Natural, Variant::DivergenceConstrained, true, 3.0, "natural/divergence+shortcut"},
      {Bc::Natural, Variant::GaussLaw, false, 2.0, "natural/gauss"},
  };
}

/// Fast solution against the dense reference for `count` random right-hand
/// sides on an nx x ny grid (one factorization per case).
inline Check oracle_equivalence(const Grid& g, const OracleCase& c, int count, std::uint64_t seed,
                                double tol) {
  std::mt19937_64 rng(seed);
  const auto sys = assemble_dense(g, c.bc, c.variant, c.alpha);
  Eigen::FullPivLU<Matrix> lu(sys.K);
  if (!lu.isInvertible()) throw SingularSystemError("oracle_equivalence: singular dense system");
  const FastSolver fast(g, c.bc);
  SolveConfig cfg;
  cfg.bc = c.bc;
  cfg.variant = c.variant;
  cfg.alpha = c.alpha;
  cfg.shortcut = c.shortcut;
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    if (c.variant == Variant::GeneralWithMultiplier) {
      const EdgeField rhs = random_rhs(g, c.bc, rng);
      Matrix H(g.ny - 1, g.nx - 1);
      std::normal_distribution<double> nd;
      for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = nd(rng);
      const auto ref = unpack(sys, lu.solve(dense_rhs(sys, rhs, H)));
      const auto sol = fast.solve_general(rhs, H, cfg);
      const double su = std::max(ref.field.max_abs(), max_abs(ref.P));
      const double d = std::max({max_abs(sol.field.U - ref.field.U), max_abs(sol.field.V - ref.field.V),
                                 max_abs(sol.P - ref.P)});
      worst = std::max(worst, d / su);
    } else {
      const EdgeField rhs = c.variant == Variant::GaussLaw ? random_rhs(g, c.bc, rng)
                                                           : random_compatible_rhs(g, c.bc, rng);
      const auto ref = unpack(sys, lu.solve(dense_rhs(sys, rhs)));
      const EdgeField sol = fast.solve(rhs, cfg);
      worst = std::max(worst, relative_difference(sol, ref.field));
    }
  }
  return make_check("oracle " + c.label + " " + std::to_string(g.nx) + "x" + std::to_string(g.ny),
                    worst, tol);
}

struct EigenSummary {
  std::size_t divergence_free = 0;
  std::size_t curl_free = 0;
  double worst_equation = 0.0;    // max residual / max|field|
  double worst_divergence = 0.0;  // divergence-free family only
  double worst_curl_free_lambda = 0.0;
};

inline EigenSummary eigen_summary(int n, Bc bc) {
  const GridOperators ops(Grid::square(n));
  const auto cat = eigen_catalog(n, bc);
  EigenSummary s;
  s.divergence_free = cat.count(Family::DivergenceFree);
  s.curl_free = cat.count(Family::CurlFree);
  for (const auto& m : cat.modes()) {
    const EigenPair p = cat.make(m);
    const EigenResidual r = verify_eigenpair(p, ops);
    s.worst_equation = std::max(s.worst_equation, r.equations / r.scale);
    if (p.family == Family::DivergenceFree) {
      s.worst_divergence = std::max(s.worst_divergence, r.divergence / r.scale);
    } else {
      s.worst_curl_free_lambda = std::max(s.worst_curl_free_lambda, std::abs(p.lambda));
    }
  }
  return s;
}

inline std::vector<Check> eigen_checks(int n, Bc bc, double tol) {
  const EigenSummary s = eigen_summary(n, bc);
  const std::string tag = std::string(" ") + std::string(to_string(bc)) + " n=" + std::to_string(n);
  const bool ess = bc == Bc::Essential;
  const std::size_t want_div = ess ? static_cast<std::size_t>(n) * n - 1 : static_cast<std::size_t>(n) * n;
  const std::size_t want_curl =
      ess ? static_cast<std::size_t>(n - 1) * (n - 1) : static_cast<std::size_t>(n + 1) * (n + 1) - 1;
  std::vector<Check> out;
  out.push_back(make_check("eigen residual" + tag, s.worst_equation, tol));
  out.push_back(make_check("eigen divergence" + tag, s.worst_divergence, tol));
  out.push_back(make_check("divergence-free count" + tag,
                           static_cast<double>(s.divergence_free == want_div ? 0 : 1), 0.0));
  out.push_back(make_check("curl-free count" + tag,
                           static_cast<double>(s.curl_free == want_curl ? 0 : 1), 0.0));
  return out;
}

/// Gauss law on random, generally incompatible data: relative residual of
/// (alpha/6) div u_h = div-moments(F, G).
inline Check gauss_law_residual(int n, Bc bc, double alpha, std::uint64_t seed, double tol) {
  const Grid g = Grid::square(n);
  const GridOperators ops(g);
  std::mt19937_64 rng(seed);
  const EdgeField rhs = random_rhs(g, bc, rng);
  SolveConfig cfg;
  cfg.bc = bc;
  cfg.variant = Variant::GaussLaw;
  cfg.alpha = alpha;
  const EdgeField u = FastSolver(g, bc).solve(rhs, cfg);
  const Matrix lhs = (alpha / 6.0) * discrete_divergence(ops, u);
  const Matrix rd = rhs_divergence(ops, rhs);
  const double scale = std::max({max_abs(lhs), max_abs(rd), 1e-300});
  return make_check("gauss law " + std::string(to_string(bc)) + " alpha=" + format_double(alpha) +
                        " n=" + std::to_string(n),
                    max_abs(lhs - rd) / scale, tol);
}

/// Multiplier problem with divergence data matching the source
/// (alpha H = div-moments): the multiplier must vanish. Reported as
/// max|P| / max|u|.
inline Check consistent_multiplier(int n, double alpha, std::uint64_t seed, double tol) {
  const Grid g = Grid::square(n);
  const GridOperators ops(g);
  std::mt19937_64 rng(seed);
  const EdgeField rhs = random_rhs(g, Bc::Essential, rng);
  const Matrix H = rhs_divergence(ops, rhs) / alpha;
  SolveConfig cfg;
  cfg.bc = Bc::Essential;
  cfg.variant = Variant::GeneralWithMultiplier;
  cfg.alpha = alpha;
  const auto sol = FastSolver(g, Bc::Essential).solve_general(rhs, H, cfg);
  return make_check("vanishing multiplier alpha=" + format_double(alpha) + " n=" + std::to_string(n),
                    max_abs(sol.P) / std::max(sol.field.max_abs(), 1e-300), tol);
}

}  // namespace fastmaxwell
