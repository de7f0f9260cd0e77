#include "fastmaxwell/oracle.hpp"
#include "fastmaxwell/spectral.hpp"
#include "fastmaxwell/verify.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace fastmaxwell;

namespace {

Vector stack(const EdgeField& f) {
  Vector v(f.U.size() + f.V.size());
  v << vec(f.U), vec(f.V);
  return v;
}

}  // namespace

TEST(Eigen, SpectralScalars) {
  const auto s = spectral_scalars(8);
  EXPECT_EQ(s.tau[0], 0.0);
  EXPECT_NEAR(s.tau[3], -2 * std::sin(3 * pi / 16), 1e-15);
  EXPECT_NEAR(s.sigma[3], 2 * (2 + std::cos(3 * pi / 8)), 1e-15);
}

TEST(Eigen, FamilyCounts) {
  for (int n : {2, 3, 7, 10}) {
    const auto e = eigen_catalog(n, Bc::Essential);
    EXPECT_EQ(e.count(Family::DivergenceFree), static_cast<std::size_t>(n * n - 1));
    EXPECT_EQ(e.count(Family::CurlFree), static_cast<std::size_t>((n - 1) * (n - 1)));
    EXPECT_EQ(e.size(), static_cast<std::size_t>(2 * n * (n - 1)));
    const auto m = eigen_catalog(n, Bc::Natural);
    EXPECT_EQ(m.count(Family::DivergenceFree), static_cast<std::size_t>(n * n));
    EXPECT_EQ(m.count(Family::CurlFree), static_cast<std::size_t>((n + 1) * (n + 1) - 1));
    EXPECT_EQ(m.size(), static_cast<std::size_t>(2 * n * (n + 1)));
  }
}

TEST(Eigen, EveryPairSatisfiesItsEquationsUpTo32) {
  for (int n = 2; n <= 32; ++n) {
    for (Bc bc : {Bc::Essential, Bc::Natural}) {
      for (const auto& c : eigen_checks(n, bc, 1e-10)) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
    }
  }
}

TEST(Eigen, CurlFreeModesHaveZeroEigenvalue) {
  const auto cat = eigen_catalog(5, Bc::Natural);
  for (const auto& m : cat.modes()) {
    if (m.family == Family::CurlFree) EXPECT_EQ(cat.make(m).lambda, 0.0);
  }
}

TEST(Eigen, SmallestEigenvalueConvergesQuadratically) {
  double prev = 0.0;
  for (int n : {16, 32, 64, 128}) {
    const double err = std::abs(smallest_eigenvalue(n) - pi * pi);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.05) << n;
    prev = err;
  }
}

TEST(Eigen, SpectrumMatchesDenseGeneralizedProblem) {
  for (Bc bc : {Bc::Essential, Bc::Natural}) {
    for (int n : {2, 3, 5}) {
      const Grid g = Grid::square(n);
      const Matrix K0 = assemble_dense(g, bc, Variant::GaussLaw, 0.0).K;
      const Matrix M = assemble_dense(g, bc, Variant::GaussLaw, 1.0).K - K0;
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(K0, M);
      std::vector<double> dense(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
      std::vector<double> cat;
      const auto c = eigen_catalog(n, bc);
      for (const auto& m : c.modes()) cat.push_back(c.make(m).lambda);
      std::sort(cat.begin(), cat.end());
      ASSERT_EQ(cat.size(), dense.size());
      for (std::size_t k = 0; k < cat.size(); ++k) {
        EXPECT_NEAR(cat[k], dense[k], 1e-9 * (1 + std::abs(cat[k]))) << to_string(bc) << " n=" << n;
      }
    }
  }
}

TEST(Eigen, CatalogSpansTheEdgeSpace) {
  // Gram matrix of all cataloged eigenfields is nonsingular
  for (Bc bc : {Bc::Essential, Bc::Natural}) {
    for (int n : {2, 3, 4, 6}) {
      const auto cat = eigen_catalog(n, bc);
      const Grid g = Grid::square(n);
      const auto shape = edge_shape(g, bc);
      const Eigen::Index dofs = shape.u_rows * shape.u_cols + shape.v_rows * shape.v_cols;
      ASSERT_EQ(static_cast<Eigen::Index>(cat.size()), dofs);
      Matrix X(dofs, dofs);
      for (std::size_t k = 0; k < cat.size(); ++k) {
        const Vector v = stack(cat[k].field);
        X.col(static_cast<Eigen::Index>(k)) = v / v.cwiseAbs().maxCoeff();
      }
      Eigen::ColPivHouseholderQR<Matrix> qr(X);
      EXPECT_EQ(qr.rank(), dofs) << to_string(bc) << " n=" << n;
    }
  }
}

TEST(Eigen, FamiliesAreMassOrthogonal) {
  const int n = 6;
  const GridOperators ops(Grid::square(n));
  for (Bc bc : {Bc::Essential, Bc::Natural}) {
    const auto cat = eigen_catalog(n, bc);
    std::vector<EdgeField> div, curl;
    for (const auto& m : cat.modes()) {
      const EdgeField f = normalize_mass(ops, cat.make(m).field);
      (m.family == Family::DivergenceFree ? div : curl).push_back(f);
    }
    double worst = 0.0;
    for (const auto& a : div)
      for (const auto& b : curl) worst = std::max(worst, std::abs(mass_inner(ops, a, b)));
    EXPECT_LT(worst, 1e-12) << to_string(bc);
  }
}

TEST(Eigen, VerifyRejectsBadInput) {
  EigenPair p;
  p.field = EdgeField::zeros(Grid::square(4), Bc::Essential);
  EXPECT_THROW(verify_eigenpair(p, GridOperators(Grid::square(4))), PreconditionError);
  const auto cat = eigen_catalog(4, Bc::Essential);
  EXPECT_THROW(verify_eigenpair(cat[0], GridOperators(Grid{4, 5})), PreconditionError);
}

TEST(Eigen, WrongEigenvalueIsDetected) {
  const int n = 8;
  const GridOperators ops(Grid::square(n));
  EigenPair p = eigen_catalog(n, Bc::Essential)[5];
  p.lambda *= 1.001;
  const EigenResidual r = verify_eigenpair(p, ops);
  EXPECT_GT(r.equations / r.scale, 1e-6);
}
