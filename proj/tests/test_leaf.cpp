#include <gtest/gtest.h>

#include <cmath>

#include "hps/leaf.hpp"
#include "hps/linalg.hpp"
#include "hps/solver.hpp"
#include "test_util.hpp"

using namespace hps;
using hps::testing::random_vector;

namespace {

const Rect kBox{0.25, 0.5, 0.5, 0.75};

ProblemSpec with_coefficient(double kappa, RealField c) {
  ProblemSpec p = zero_problem(kappa, cplx(1.5, 0.25));
  p.coefficient = std::move(c);
  return p;
}

CMatrix stacked_identity(Index rows, Index cols, Index offset) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) m(offset + j, j) = 1.0;
  return m;
}

}  // namespace

TEST(LeafDiscretization, DimensionsAndPoints) {
  const auto d = build_leaf_discretization(kBox, with_coefficient(2.0, gaussian_bump), 10);
  EXPECT_EQ(d.n_boundary(), 32);
  EXPECT_EQ(d.n_interior(), 64);
  EXPECT_EQ(d.b.rows(), 96);
  EXPECT_EQ(d.b.cols(), 96);
  EXPECT_EQ(d.normal.rows(), 32);
  EXPECT_EQ(d.normal.cols(), 96);
  ASSERT_EQ(d.points.size(), 96u);
  EXPECT_EQ(d.points[0][1], kBox.ymin);  // first boundary point is on the south edge
  EXPECT_EQ(d.points[8][0], kBox.xmax);  // then east
}

TEST(LeafDiscretization, ZeroCoefficientGivesNegativeLaplacian) {
  const auto d = build_leaf_discretization(kBox, with_coefficient(3.0, [](double, double) { return 0.0; }), 8);
  const CMatrix lap = gemm(d.dx, d.dx) + gemm(d.dy, d.dy);
  CMatrix neg(lap.rows(), lap.cols());
  for (Index j = 0; j < lap.cols(); ++j)
    for (Index i = 0; i < lap.rows(); ++i) neg(i, j) = -lap(i, j);
  EXPECT_LE(max_abs_diff(d.a_hat, neg), 1e-9 * norm_max(neg));
}

TEST(LeafDiscretization, ZeroWavenumberIgnoresCoefficient) {
  const auto a = build_leaf_discretization(kBox, with_coefficient(0.0, gaussian_bump), 8);
  const auto b = build_leaf_discretization(kBox, with_coefficient(0.0, [](double, double) { return 0.0; }), 8);
  EXPECT_EQ(max_abs_diff(a.a_hat, b.a_hat), 0.0);
}

TEST(LeafDiscretization, CoefficientEntersDiagonal) {
  const double kappa = 3.0;
  const auto a = build_leaf_discretization(kBox, with_coefficient(kappa, gaussian_bump), 8);
  const auto b = build_leaf_discretization(kBox, with_coefficient(kappa, [](double, double) { return 0.0; }), 8);
  const int n = 8;
  const auto gx = cheb_nodes(n, kBox.xmin, kBox.xmax), gy = cheb_nodes(n, kBox.ymin, kBox.ymax);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Index g = ix + n * iy;
      // The diagonals carry second-derivative entries of size ~1e4; compare relative to them.
      EXPECT_NEAR(std::abs(b.a_hat(g, g) - a.a_hat(g, g)), kappa * kappa * gaussian_bump(gx.nodes[ix], gy.nodes[iy]),
                  1e-15 * std::abs(b.a_hat(g, g)) + 1e-14);
    }
}

TEST(LeafDiscretization, NormalRowsUseOutwardNormals) {
  const auto d = build_leaf_discretization(kBox, with_coefficient(1.0, gaussian_bump), 8);
  const auto& s = d.sets;
  const Index ne = 6;
  for (Index k = 0; k < ne; ++k)
    for (Index c = 0; c < d.n_total(); ++c) {
      EXPECT_EQ(d.normal(k, c), -d.dy(s.south[k], s.all[c]));
      EXPECT_EQ(d.normal(ne + k, c), d.dx(s.east[k], s.all[c]));
      EXPECT_EQ(d.normal(2 * ne + k, c), d.dy(s.north[k], s.all[c]));
      EXPECT_EQ(d.normal(3 * ne + k, c), -d.dx(s.west[k], s.all[c]));
    }
  // Outward derivative of u = y at the south edge is -1, of u = x at the east edge +1.
  CVector y_samples, x_samples;
  for (const auto& p : d.points) {
    y_samples.push_back(p[1]);
    x_samples.push_back(p[0]);
  }
  const CVector dn_y = matvec(d.normal, y_samples);
  const CVector dn_x = matvec(d.normal, x_samples);
  for (Index k = 0; k < ne; ++k) {
    EXPECT_NEAR(dn_y[k].real(), -1.0, 1e-11);
    EXPECT_NEAR(dn_x[ne + k].real(), 1.0, 1e-11);
    EXPECT_NEAR(dn_y[2 * ne + k].real(), 1.0, 1e-11);
    EXPECT_NEAR(dn_x[3 * ne + k].real(), -1.0, 1e-11);
  }
}

TEST(LeafDiscretization, ImpedanceMatricesShiftByEta) {
  const auto d = build_leaf_discretization(kBox, with_coefficient(1.0, gaussian_bump), 6);
  const cplx ieta = cplx(0, 1) * d.eta;
  for (Index i = 0; i < d.n_boundary(); ++i)
    for (Index c = 0; c < d.n_total(); ++c) {
      const cplx id = (i == c) ? ieta : 0.0;
      EXPECT_EQ(d.f(i, c), d.normal(i, c) + id);
      EXPECT_EQ(d.g(i, c), d.normal(i, c) - id);
    }
}

TEST(LeafOperators, SolveTheirDefiningSystems) {
  const auto d = build_leaf_discretization(kBox, with_coefficient(4.0, gaussian_bump), 12);
  const auto op = build_leaf_operators(d);
  const Index nb = d.n_boundary(), ni = d.n_interior(), nt = d.n_total();
  EXPECT_EQ(op.psi.rows(), nt);
  EXPECT_EQ(op.psi.cols(), nb);
  EXPECT_EQ(op.y.rows(), nt);
  EXPECT_EQ(op.y.cols(), ni);
  EXPECT_EQ(op.r.rows(), nb);
  EXPECT_EQ(op.gamma.cols(), ni);
  EXPECT_LE(max_abs_diff(gemm(d.b, op.psi), stacked_identity(nt, nb, 0)), 1e-10);
  EXPECT_LE(max_abs_diff(gemm(d.b, op.y), stacked_identity(nt, ni, nb)), 1e-10);
  EXPECT_LE(max_abs_diff(gemm(d.g, op.psi), op.r), 1e-12 * std::max(1.0, norm_max(op.r)));
  EXPECT_LE(max_abs_diff(gemm(d.g, op.y), op.gamma), 1e-12 * std::max(1.0, norm_max(op.gamma)));
}

TEST(LeafOperators, OutgoingDataIdentity) {
  const auto d = build_leaf_discretization(kBox, with_coefficient(4.0, gaussian_bump), 10);
  const auto op = build_leaf_operators(d);
  const CVector t = random_vector(d.n_boundary(), 3);
  const CVector s = random_vector(d.n_interior(), 4);
  CVector u = matvec(op.psi, t);
  matvec_update(u, 1.0, op.y, s);
  const CVector gu = matvec(d.g, u);
  CVector g = matvec(op.r, t);
  matvec_update(g, 1.0, op.gamma, s);
  EXPECT_LE(max_abs_diff(gu, g), 1e-11 * std::max(1.0, norm_max(g)));
}

TEST(LeafOperators, WorkerCountDoesNotChangeResult) {
  const auto d = build_leaf_discretization(kBox, with_coefficient(4.0, gaussian_bump), 16);
  const auto a = build_leaf_operators(d, 1);
  const auto b = build_leaf_operators(d, 4);
  EXPECT_EQ(max_abs_diff(a.psi, b.psi), 0.0);
  EXPECT_EQ(max_abs_diff(a.r, b.r), 0.0);
}

TEST(LeafOperators, SingleLeafPlaneWaveConverges) {
  // Plane wave with small κ·h: error falls toward roundoff as n_c grows.
  const auto p = plane_wave_problem(3.0, 0.7);
  double prev = 1.0;
  std::vector<double> errs;
  for (int n : {6, 9, 12, 16}) {
    const auto st = SolverState::build(p, 1, n, ThreadPlan::serial(1));
    const auto sol = solve(st, p, ThreadPlan::serial(1));
    errs.push_back(*sol.e_inf);
  }
  for (double e : errs) {
    EXPECT_LT(e, prev);
    prev = std::max(e, 1e-13);
  }
  EXPECT_LT(errs[1], errs[0] * 1e-2);
  EXPECT_LT(errs.back(), 1e-11);
}
