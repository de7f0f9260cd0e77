#include "fastmaxwell/assembly.hpp"
#include "fastmaxwell/operators.hpp"
#include "fastmaxwell/problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace fastmaxwell;

namespace {

EdgeField random_field(const Grid& g, Bc bc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  EdgeField f = EdgeField::zeros(g, bc);
  for (Eigen::Index i = 0; i < f.U.size(); ++i) f.U.data()[i] = nd(rng);
  for (Eigen::Index i = 0; i < f.V.size(); ++i) f.V.data()[i] = nd(rng);
  return f;
}

double inner(const EdgeField& a, const EdgeField& b) {
  return (a.U.array() * b.U.array()).sum() + (a.V.array() * b.V.array()).sum();
}

}  // namespace

TEST(Grid, CouplingMatrixShapesAndIdentity) {
  for (int n : {2, 3, 8}) {
    const auto c = coupling_matrices(n);
    EXPECT_EQ(c.A.rows(), n - 1);
    EXPECT_EQ(c.B.rows(), n - 1);
    EXPECT_EQ(c.B.cols(), n);
    EXPECT_EQ(c.Ab.rows(), n + 1);
    EXPECT_EQ(c.Bb.rows(), n);
    EXPECT_EQ(c.Bb.cols(), n + 1);
    EXPECT_LT(max_abs(Matrix(c.B * SparseMatrix(c.B.transpose())) - Matrix(c.A)), 1e-15);
    const Matrix D(c.D);
    for (int i = 0; i < n - 1; ++i) EXPECT_EQ(D(i, i), 4.0);
  }
}

TEST(Grid, EdgeShapes) {
  const Grid g{4, 6};
  const auto e = edge_shape(g, Bc::Essential);
  EXPECT_EQ(e.u_rows, 6);
  EXPECT_EQ(e.u_cols, 3);
  EXPECT_EQ(e.v_rows, 5);
  EXPECT_EQ(e.v_cols, 4);
  const auto n = edge_shape(g, Bc::Natural);
  EXPECT_EQ(n.u_rows, 6);
  EXPECT_EQ(n.u_cols, 5);
  EXPECT_EQ(n.v_rows, 7);
  EXPECT_EQ(n.v_cols, 4);
  // total DOF counts 2n(n-1) and 2n(n+1)
  const Grid s = Grid::square(5);
  const auto es = edge_shape(s, Bc::Essential), ns = edge_shape(s, Bc::Natural);
  EXPECT_EQ(es.u_rows * es.u_cols + es.v_rows * es.v_cols, 2 * 5 * 4);
  EXPECT_EQ(ns.u_rows * ns.u_cols + ns.v_rows * ns.v_cols, 2 * 5 * 6);
}

TEST(Grid, RejectsDegenerateGrids) {
  EXPECT_THROW(Grid::square(1).validate(), SizeError);
  EXPECT_THROW((Grid{4, 1}).validate(), SizeError);
  EXPECT_THROW(parse_bc("periodic"), PreconditionError);
}

TEST(Assembly, EmbedRestrictRoundTrip) {
  const Grid g{5, 3};
  const EdgeField e = random_field(g, Bc::Essential, 1);
  const EdgeField full = embed_full(e);
  EXPECT_EQ(full.bc, Bc::Natural);
  EXPECT_EQ(full.U.col(0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(full.V.row(g.ny).cwiseAbs().maxCoeff(), 0.0);
  const EdgeField back = restrict_interior(full);
  EXPECT_EQ(max_abs(back.U - e.U), 0.0);
  EXPECT_EQ(max_abs(back.V - e.V), 0.0);
}

TEST(Assembly, ZeroSourceGivesZeroMoments) {
  const Grid g = Grid::square(6);
  const EdgeField r = assemble_rhs_edge(g, Bc::Essential, [](double, double) { return Vec2{0, 0}; });
  EXPECT_EQ(r.max_abs(), 0.0);
}

TEST(Assembly, ConstantSourceMoments) {
  const Grid g{4, 8};
  const EdgeField r = assemble_rhs_edge(g, Bc::Natural, [](double, double) { return Vec2{2.0, 3.0}; });
  // basis functions carry 1/h, so an interior moment is the component
  // times the cell width across the edge; boundary edges get half
  EXPECT_NEAR(r.U(2, 2), 3.0 * g.hx(), 1e-15);
  EXPECT_NEAR(r.U(2, 0), 0.5 * 3.0 * g.hx(), 1e-15);
  EXPECT_NEAR(r.V(3, 1), 2.0 * g.hy(), 1e-15);
  EXPECT_NEAR(r.V(0, 1), 0.5 * 2.0 * g.hy(), 1e-15);
}

TEST(Assembly, NonFiniteSourceThrows) {
  const Grid g = Grid::square(4);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(assemble_rhs_edge(g, Bc::Essential, [nan](double, double) { return Vec2{nan, 0}; }),
               EvaluationError);
  EXPECT_THROW(assemble_rhs_nodal(g, [nan](double, double) { return nan; }), EvaluationError);
}

TEST(Assembly, InterpolantOfDiscreteFieldHasZeroError) {
  // (a + b y, c + d x) lies in the lowest-order edge space
  const auto u = [](double x, double y) { return Vec2{0.3 + 1.5 * y, -0.7 + 2.0 * x}; };
  const auto rot = [](double, double) { return 2.0 - 1.5; };
  const Grid g{6, 4};
  const EdgeField ih = interpolate_edge(g, Bc::Natural, u);
  const ErrorNorms e = error_norms(ih, u, rot);
  EXPECT_LT(e.l2, 1e-14);
  EXPECT_LT(e.rot, 1e-13);
}

TEST(Assembly, SystemReproducesMassOnDiscreteFields) {
  // rot is constant, so the curl-curl part vanishes on interior rows and
  // K u_I = hx hy (alpha u, N) there
  const auto u = [](double x, double y) { return Vec2{1.0 - 0.5 * y, 2.0 + 0.25 * x}; };
  for (double alpha : {0.0, 1.0, 3.5}) {
    const Grid g{5, 7};
    const GridOperators ops(g);
    const EdgeField ih = interpolate_edge(g, Bc::Natural, u);
    const EdgeField rhs = assemble_rhs_edge(g, Bc::Natural, [&](double x, double y) {
      const Vec2 v = u(x, y);
      return Vec2{alpha * v.x, alpha * v.y};
    });
    const EdgeField k = restrict_interior(apply_system(ops, ih, alpha));
    const EdgeField f = restrict_interior(rhs);
    const double area = g.hx() * g.hy();
    EXPECT_LT(max_abs(k.U - area * f.U), 1e-14);
    EXPECT_LT(max_abs(k.V - area * f.V), 1e-14);
  }
}

TEST(Assembly, SystemIsSymmetric) {
  for (Bc bc : {Bc::Essential, Bc::Natural}) {
    const Grid g{6, 5};
    const GridOperators ops(g);
    const EdgeField x = random_field(g, bc, 2), y = random_field(g, bc, 3);
    const double a = inner(apply_system(ops, x, 1.7), y);
    const double b = inner(x, apply_system(ops, y, 1.7));
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
  }
}

TEST(Assembly, GradientsAreInCurlCurlKernel) {
  // edge interpolant of grad phi, phi = sin x e^y: rot = 0, so the alpha = 0
  // action vanishes
  const auto grad = [](double x, double y) {
    return Vec2{std::cos(x) * std::exp(y), std::sin(x) * std::exp(y)};
  };
  const Grid g = Grid::square(9);
  const GridOperators ops(g);
  const EdgeField ih = interpolate_edge(g, Bc::Natural, grad);
  EXPECT_LT(apply_system(ops, ih, 0.0).max_abs(), 1e-12);
}

TEST(Assembly, NodalMomentsOfConstant) {
  const Grid g{4, 4};
  const Matrix H = assemble_rhs_nodal(g, [](double, double) { return 1.0; });
  ASSERT_EQ(H.rows(), 3);
  ASSERT_EQ(H.cols(), 3);
  EXPECT_NEAR(H(1, 1), g.hx() * g.hy(), 1e-15);
}

TEST(Assembly, DivergenceMatchesNodalMomentsForGradients) {
  // u = grad phi, phi vanishing on the boundary: the Galerkin divergence of
  // the interpolant approximates the nodal moments of lap phi
  const auto u = [](double x, double y) {
    return Vec2{pi * std::cos(pi * x) * std::sin(pi * y), pi * std::sin(pi * x) * std::cos(pi * y)};
  };
  const Grid g = Grid::square(32);
  const GridOperators ops(g);
  const EdgeField ih = interpolate_edge(g, Bc::Essential, u);
  const Matrix div = discrete_divergence(ops, ih) / 6.0;
  const Matrix H = assemble_rhs_nodal(g, [](double x, double y) {
    return -2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
  });
  EXPECT_LT(max_abs(div - H) / max_abs(H), 5e-3);
}

TEST(Assembly, Example4SourceMatchesFiniteDifferences) {
  const Problem p = problems::example4();
  const double h = 1e-4;
  auto w = [&](double x, double y) { return p.beta(x, y) * p.rot_u(x, y); };
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ud(0.05, 0.95);
  for (int k = 0; k < 20; ++k) {
    const double x = ud(rng), y = ud(rng);
    const double dwdy = (w(x, y + h) - w(x, y - h)) / (2 * h);
    const double dwdx = (w(x + h, y) - w(x - h, y)) / (2 * h);
    const Vec2 uv = p.u(x, y);
    const double a = p.alpha_fn(x, y);
    const Vec2 f = p.f(x, y);
    EXPECT_NEAR(f.x, dwdy + a * uv.x, 1e-6 * (1 + std::abs(f.x)));
    EXPECT_NEAR(f.y, -dwdx + a * uv.y, 1e-6 * (1 + std::abs(f.y)));
  }
}

TEST(Assembly, ExactSolutionsMatchTheirRot) {
  const double h = 1e-5;
  for (const auto& p : problem_registry()) {
    for (double x : {0.2, 0.45, 0.8}) {
      for (double y : {0.1, 0.6}) {
        const double r = (p.u(x + h, y).y - p.u(x - h, y).y) / (2 * h) -
                         (p.u(x, y + h).x - p.u(x, y - h).x) / (2 * h);
        EXPECT_NEAR(r, p.rot_u(x, y), 1e-7 * (1 + std::abs(r))) << p.name;
      }
    }
  }
}

TEST(Assembly, ConstantSourcesSatisfyTheirEquations) {
  // for the constant-coefficient examples f = curl rot u + alpha u (+ grad p)
  const double h = 1e-4;
  for (const auto& p : problem_registry()) {
    if (p.variable_coefficients() || p.name == "example5") continue;
    for (double x : {0.3, 0.7}) {
      for (double y : {0.25, 0.55}) {
        const double dwdy = (p.rot_u(x, y + h) - p.rot_u(x, y - h)) / (2 * h);
        const double dwdx = (p.rot_u(x + h, y) - p.rot_u(x - h, y)) / (2 * h);
        const Vec2 uv = p.u(x, y), f = p.f(x, y);
        EXPECT_NEAR(f.x, dwdy + p.alpha * uv.x, 1e-6) << p.name;
        EXPECT_NEAR(f.y, -dwdx + p.alpha * uv.y, 1e-6) << p.name;
      }
    }
  }
}

TEST(Assembly, ConstantFieldSurvivesLifting) {
  // nonhomogeneous essential data from a constant field, zero source
  Problem p;
  p.name = "constant";
  p.bc = Bc::Essential;
  p.variant = Variant::GeneralWithMultiplier;
  p.alpha = 0.0;
  p.nonhomogeneous = true;
  p.u = [](double, double) { return Vec2{1.0, 3.0}; };
  p.rot_u = [](double, double) { return 0.0; };
  p.f = [](double, double) { return Vec2{0.0, 0.0}; };
  p.rho = [](double, double) { return 0.0; };
  for (int n : {4, 16}) {
    const ProblemRun run = run_problem(p, n);
    const EdgeField ih = interpolate_edge(Grid::square(n), Bc::Natural, p.u);
    EXPECT_LT(max_abs(run.field.U - ih.U), 1e-12);
    EXPECT_LT(max_abs(run.field.V - ih.V), 1e-12);
    EXPECT_LT(max_abs(run.P), 1e-12);
  }
}
