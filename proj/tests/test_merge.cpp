#include <gtest/gtest.h>

#include <map>

#include "hps/leaf.hpp"
#include "hps/linalg.hpp"
#include "hps/merge.hpp"
#include "hps/solver.hpp"
#include "merge_oracle.hpp"
#include "test_util.hpp"

using namespace hps;
using hps::testing::random_matrix;
using hps::testing::random_vector;

namespace {

ProblemSpec unit_coefficient(double kappa) {
  ProblemSpec p = zero_problem(kappa);
  p.coefficient = [](double, double) { return 1.0; };
  return p;
}

CMatrix leaf_r(const BoxTree& t, const ProblemSpec& p, int id) {
  return build_leaf_operators(build_leaf_discretization(t.node(id).rect, p, t.n_c())).r;
}

CVector stack(const CVector& a, const CVector& b) {
  CVector out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Random child operators whose interface-interface blocks vanish.
std::pair<CMatrix, CMatrix> decoupled_children(const SiblingIndexSets& idx, std::uint64_t seed) {
  CMatrix ra = random_matrix(idx.n1() + idx.n3(), idx.n1() + idx.n3(), seed);
  CMatrix rb = random_matrix(idx.n2() + idx.n3(), idx.n2() + idx.n3(), seed + 1);
  for (Index i : idx.interface_alpha)
    for (Index j : idx.interface_alpha) ra(i, j) = 0.0;
  for (Index i : idx.interface_beta)
    for (Index j : idx.interface_beta) rb(i, j) = 0.0;
  return {ra, rb};
}

}  // namespace

TEST(Merge, DecoupledInterface) {
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 6);
  const auto& idx = t.sibling_sets(1);
  auto [ra, rb] = decoupled_children(idx, 11);
  const CMatrix r11a = submatrix(ra, idx.exterior_alpha, idx.exterior_alpha);
  const CMatrix r22b = submatrix(rb, idx.exterior_beta, idx.exterior_beta);
  const CMatrix r31a = submatrix(ra, idx.interface_alpha, idx.exterior_alpha);
  const CMatrix r32b = submatrix(rb, idx.interface_beta, idx.exterior_beta);
  const auto m = merge(ra, rb, idx);
  EXPECT_EQ(max_abs_diff(m.w_inv, CMatrix::identity(idx.n3())), 0.0);
  for (Index i = 0; i < m.n3; ++i) {
    for (Index j = 0; j < m.n1; ++j) {
      EXPECT_EQ(m.phi_alpha(i, j), cplx(0.0));
      EXPECT_EQ(m.phi_beta(i, j), -r31a(i, j));
    }
    for (Index j = 0; j < m.n2; ++j) {
      EXPECT_EQ(m.phi_alpha(i, m.n1 + j), -r32b(i, j));
      EXPECT_EQ(m.phi_beta(i, m.n1 + j), cplx(0.0));
    }
  }
  // With only R33 zero the interface still couples the exterior blocks:
  // R^τ = [R11α, -R13α R32β; -R23β R31α, R22β].
  const CMatrix r13a = submatrix(ra, idx.exterior_alpha, idx.interface_alpha);
  const CMatrix r23b = submatrix(rb, idx.exterior_beta, idx.interface_beta);
  CMatrix expected(m.n1 + m.n2, m.n1 + m.n2);
  set_block(expected, 0, 0, r11a);
  set_block(expected, m.n1, m.n1, r22b);
  set_block(expected, 0, m.n1, hps::testing::negate(gemm(r13a, r32b)));
  set_block(expected, m.n1, 0, hps::testing::negate(gemm(r23b, r31a)));
  EXPECT_LE(max_abs_diff(m.r, expected), 1e-14 * norm_max(expected));
}

TEST(Merge, FullyDecoupledChildrenGiveBlockDiagonal) {
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 6);
  const auto& idx = t.sibling_sets(1);
  auto [ra, rb] = decoupled_children(idx, 13);
  for (Index i : idx.interface_alpha)
    for (Index j : idx.exterior_alpha) ra(i, j) = ra(j, i) = 0.0;
  for (Index i : idx.interface_beta)
    for (Index j : idx.exterior_beta) rb(i, j) = rb(j, i) = 0.0;
  const CMatrix r11a = submatrix(ra, idx.exterior_alpha, idx.exterior_alpha);
  const CMatrix r22b = submatrix(rb, idx.exterior_beta, idx.exterior_beta);
  const auto m = merge(ra, rb, idx);
  CMatrix expected(m.n1 + m.n2, m.n1 + m.n2);
  set_block(expected, 0, 0, r11a);
  set_block(expected, m.n1, m.n1, r22b);
  EXPECT_EQ(max_abs_diff(m.r, expected), 0.0);
}

TEST(Merge, MatchesDenseEliminationForTwoLeaves) {
  const auto p = unit_coefficient(2.0);
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 8);
  const auto m = merge(leaf_r(t, p, 2), leaf_r(t, p, 3), t.sibling_sets(1));
  EXPECT_LE(max_abs_diff(m.r, oracle_iti(p, t, 1)), 1e-9);
  CMatrix w = CMatrix::identity(m.n3) - gemm(m.r33_beta, m.r33_alpha);
  EXPECT_LE(max_abs_diff(gemm(w, m.w_inv), CMatrix::identity(m.n3)), 1e-10);
}

TEST(Merge, HorizontalMergeMatchesDenseElimination) {
  const auto p = unit_coefficient(3.0);
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 3, 8);
  const auto m = merge(leaf_r(t, p, 4), leaf_r(t, p, 5), t.sibling_sets(2));
  EXPECT_LE(max_abs_diff(m.r, oracle_iti(p, t, 2)), 1e-9);
}

TEST(Merge, InterfaceDataSatisfiesBothChildren) {
  const auto p = manufactured_problem(3.0);
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 10);
  const auto& idx = t.sibling_sets(1);
  const CMatrix ra = leaf_r(t, p, 2), rb = leaf_r(t, p, 3);
  const auto m = merge(ra, rb, idx);
  const CVector ext = random_vector(m.n1 + m.n2, 5);
  const CVector ha = random_vector(ra.rows(), 6), hb = random_vector(rb.rows(), 7);
  const auto corr = apply_upsilon(m, gather(ha, idx.interface_alpha), gather(hb, idx.interface_beta));

  CVector ta3 = matvec(m.phi_alpha, ext), tb3 = matvec(m.phi_beta, ext);
  for (Index k = 0; k < m.n3; ++k) {
    ta3[k] += corr.alpha[k];
    tb3[k] += corr.beta[k];
  }
  CVector ta(static_cast<std::size_t>(ra.rows())), tb(static_cast<std::size_t>(rb.rows()));
  for (Index k = 0; k < m.n1; ++k) ta[idx.exterior_alpha[k]] = ext[k];
  for (Index k = 0; k < m.n2; ++k) tb[idx.exterior_beta[k]] = ext[m.n1 + k];
  scatter(ta, idx.interface_alpha, ta3);
  scatter(tb, idx.interface_beta, tb3);
  CVector ga = matvec(ra, ta), gb = matvec(rb, tb);
  for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += ha[k];
  for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += hb[k];

  // Opposite normals: incoming on one side is minus outgoing on the other.
  for (Index k = 0; k < m.n3; ++k) {
    EXPECT_NEAR(std::abs(ta3[k] + gb[idx.interface_beta[k]]), 0.0, 1e-11);
    EXPECT_NEAR(std::abs(tb3[k] + ga[idx.interface_alpha[k]]), 0.0, 1e-11);
  }
  // Parent outgoing data: R^τ ext + h^τ equals the children's exterior outgoing data.
  CVector g_parent = matvec(m.r, ext);
  CVector h_tau = apply_gamma_tau(m, corr);
  for (Index k = 0; k < m.n1; ++k) h_tau[k] += ha[idx.exterior_alpha[k]];
  for (Index k = 0; k < m.n2; ++k) h_tau[m.n1 + k] += hb[idx.exterior_beta[k]];
  for (std::size_t k = 0; k < g_parent.size(); ++k) g_parent[k] += h_tau[k];
  const double scale = std::max(1.0, norm_max(g_parent));
  for (Index k = 0; k < m.n1; ++k) EXPECT_LE(std::abs(g_parent[k] - ga[idx.exterior_alpha[k]]), 1e-11 * scale);
  for (Index k = 0; k < m.n2; ++k) EXPECT_LE(std::abs(g_parent[m.n1 + k] - gb[idx.exterior_beta[k]]), 1e-11 * scale);
}

TEST(Merge, OrientationCovariance) {
  // A horizontal merge of two stacked squares equals the vertical merge of the
  // transposed configuration, with boundary points matched by transposition.
  const auto p = unit_coefficient(2.5);
  const auto th = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 3, 8);     // box 2: horizontal split of [0,.5]x[0,1]
  const auto tv = BoxTree::build_uniform(Rect{0, 1, 0, 0.5}, 2, 8);   // box 1: vertical split of [0,1]x[0,.5]
  const auto mh = merge(leaf_r(th, p, 4), leaf_r(th, p, 5), th.sibling_sets(2));
  const auto mv = merge(leaf_r(tv, p, 2), leaf_r(tv, p, 3), tv.sibling_sets(1));
  std::map<std::pair<double, double>, Index> pos_v;
  const auto bv = tv.boundary(1);
  for (std::size_t k = 0; k < bv.size(); ++k) pos_v[{bv[k].x, bv[k].y}] = static_cast<Index>(k);
  const auto bh = th.boundary(2);
  ASSERT_EQ(bh.size(), bv.size());
  std::vector<Index> perm;
  for (const auto& q : bh) perm.push_back(pos_v.at({q.y, q.x}));
  const CMatrix rv = submatrix(mv.r, perm, perm);
  EXPECT_LE(max_abs_diff(mh.r, rv), 1e-10 * std::max(1.0, norm_max(rv)));
}

TEST(Merge, RejectsSizeMismatch) {
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 6);
  EXPECT_THROW(merge(CMatrix(5, 5), CMatrix(20, 20), t.sibling_sets(1)), DimensionError);
}

TEST(ApplyUpsilon, ZeroInputsGiveZero) {
  const auto p = manufactured_problem(2.0);
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 8);
  const auto m = merge(leaf_r(t, p, 2), leaf_r(t, p, 3), t.sibling_sets(1));
  const CVector z(static_cast<std::size_t>(m.n3));
  const auto c = apply_upsilon(m, z, z);
  EXPECT_EQ(norm_max(c.alpha), 0.0);
  EXPECT_EQ(norm_max(c.beta), 0.0);
  EXPECT_EQ(norm_max(apply_gamma_tau(m, z, z)), 0.0);
  EXPECT_THROW(apply_upsilon(m, CVector(3), z), DimensionError);
}

TEST(ApplyUpsilon, DecoupledInterfaceSwapsLoads) {
  const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 6);
  const auto& idx = t.sibling_sets(1);
  auto [ra, rb] = decoupled_children(idx, 21);
  const auto m = merge(ra, rb, idx);
  const CVector ha = random_vector(m.n3, 1), hb = random_vector(m.n3, 2);
  const auto c = apply_upsilon(m, ha, hb);
  for (Index k = 0; k < m.n3; ++k) {
    EXPECT_EQ(c.alpha[k], -hb[k]);
    EXPECT_EQ(c.beta[k], -ha[k]);
  }
}

TEST(ApplyUpsilon, MatchesExplicitOperators) {
  const auto p = manufactured_problem(4.0);
  for (int levels : {2, 3, 4}) {
    const auto t = BoxTree::build_uniform(Rect{0, 1, 0, 1}, levels, 8);
    // Children operators: leaf factory for leaves, dense elimination otherwise.
    const auto& idx = t.sibling_sets(1);
    const auto [a, b] = *t.node(1).children;
    const CMatrix ra = t.node(a).is_leaf() ? leaf_r(t, p, a) : oracle_iti(p, t, a);
    const CMatrix rb = t.node(b).is_leaf() ? leaf_r(t, p, b) : oracle_iti(p, t, b);
    const auto ex = hps::testing::explicit_merge_operators(ra, rb, idx);
    const auto m = merge(ra, rb, idx);
    const CVector ha = random_vector(m.n3, 60 + levels), hb = random_vector(m.n3, 70 + levels);
    const CVector stacked = stack(ha, hb);
    const auto c = apply_upsilon(m, ha, hb);
    const CVector ea = matvec(ex.upsilon_alpha, stacked), eb = matvec(ex.upsilon_beta, stacked);
    const CVector eg = matvec(ex.gamma_tau, stacked);
    EXPECT_LE(max_abs_diff(c.alpha, ea), 1e-12 * std::max(1.0, norm_max(ea))) << levels;
    EXPECT_LE(max_abs_diff(c.beta, eb), 1e-12 * std::max(1.0, norm_max(eb))) << levels;
    const CVector g = apply_gamma_tau(m, ha, hb);
    EXPECT_LE(max_abs_diff(g, eg), 1e-12 * std::max(1.0, norm_max(eg))) << levels;
  }
}
