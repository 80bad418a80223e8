#include "hps/merge.hpp"

#include <cstdio>

#include "hps/linalg.hpp"

namespace hps {

std::size_t MergeOperators::retained_bytes() const noexcept {
  return phi_alpha.bytes() + phi_beta.bytes() + w_inv.bytes() + r33_alpha.bytes() + r33_beta.bytes() +
         r13_alpha.bytes() + r23_beta.bytes();
}

MergeOperators merge(CMatrix r_alpha, CMatrix r_beta, const SiblingIndexSets& idx, int workers) {
  const auto& i1 = idx.exterior_alpha;
  const auto& i2 = idx.exterior_beta;
  const auto& i3a = idx.interface_alpha;
  const auto& i3b = idx.interface_beta;
  const Index na = r_alpha.rows(), nb = r_beta.rows();
  if (r_alpha.cols() != na || r_beta.cols() != nb)
    throw DimensionError("merge: child operators must be square");
  if (idx.n1() + idx.n3() != na || idx.n2() + idx.n3() != nb)
    throw DimensionError("merge: index sets do not match child operator sizes");

  MergeOperators m;
  m.n1 = idx.n1();
  m.n2 = idx.n2();
  m.n3 = idx.n3();
  m.r33_alpha = submatrix(r_alpha, i3a, i3a);
  m.r13_alpha = submatrix(r_alpha, i1, i3a);
  const CMatrix r31a = submatrix(r_alpha, i3a, i1);
  const CMatrix r11a = submatrix(r_alpha, i1, i1);
  r_alpha.release();
  m.r33_beta = submatrix(r_beta, i3b, i3b);
  m.r23_beta = submatrix(r_beta, i2, i3b);
  const CMatrix r32b = submatrix(r_beta, i3b, i2);
  const CMatrix r22b = submatrix(r_beta, i2, i2);
  r_beta.release();

  CMatrix w = CMatrix::identity(m.n3);
  gemm_update(w, -1.0, m.r33_beta, m.r33_alpha, workers);
  try {
    m.w_inv = lu_invert(w, workers);
  } catch (const SingularMatrixError& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "merge: interface matrix W is singular (pivot %td, |pivot| %.3g, ||W||_1 %.3g)",
                  e.pivot(), e.pivot_magnitude(), norm_one(w));
    throw SingularMatrixError(buf, e.pivot(), e.pivot_magnitude());
  }
  m.w_condition = condition_one(w, m.w_inv);

  // Φα = W⁻¹ [R33β R31α | -R32β]
  CMatrix rhs(m.n3, m.n1 + m.n2);
  set_block(rhs, 0, 0, gemm(m.r33_beta, r31a, workers));
  for (Index j = 0; j < m.n2; ++j)
    for (Index i = 0; i < m.n3; ++i) rhs(i, m.n1 + j) = -r32b(i, j);
  m.phi_alpha = gemm(m.w_inv, rhs, workers);

  // Φβ = [-R31α | 0] - R33α Φα
  m.phi_beta = CMatrix(m.n3, m.n1 + m.n2);
  for (Index j = 0; j < m.n1; ++j)
    for (Index i = 0; i < m.n3; ++i) m.phi_beta(i, j) = -r31a(i, j);
  gemm_update(m.phi_beta, -1.0, m.r33_alpha, m.phi_alpha, workers);

  // Parent ItI: rows I_1 = [R11α 0] + R13α Φα, rows I_2 = [0 R22β] + R23β Φβ.
  CMatrix top(m.n1, m.n1 + m.n2);
  set_block(top, 0, 0, r11a);
  gemm_update(top, 1.0, m.r13_alpha, m.phi_alpha, workers);
  CMatrix bottom(m.n2, m.n1 + m.n2);
  set_block(bottom, 0, m.n1, r22b);
  gemm_update(bottom, 1.0, m.r23_beta, m.phi_beta, workers);
  m.r = vstack(top, bottom);
  return m;
}

InterfaceCorrections apply_upsilon(const MergeOperators& m, std::span<const cplx> h_alpha3,
                                   std::span<const cplx> h_beta3, int workers) {
  if (static_cast<Index>(h_alpha3.size()) != m.n3 || static_cast<Index>(h_beta3.size()) != m.n3)
    throw DimensionError("apply_upsilon: interface vector length mismatch");
  // t̃α = W⁻¹(R33β hα3 - hβ3);  t̃β = -(hα3 + R33α t̃α)
  CVector tmp(h_beta3.begin(), h_beta3.end());
  for (auto& v : tmp) v = -v;
  matvec_update(tmp, 1.0, m.r33_beta, h_alpha3, workers);
  InterfaceCorrections out;
  out.alpha = matvec(m.w_inv, tmp, workers);
  out.beta.assign(h_alpha3.begin(), h_alpha3.end());
  matvec_update(out.beta, 1.0, m.r33_alpha, out.alpha, workers);
  for (auto& v : out.beta) v = -v;
  return out;
}

CVector apply_gamma_tau(const MergeOperators& m, const InterfaceCorrections& corr, int workers) {
  if (static_cast<Index>(corr.alpha.size()) != m.n3 || static_cast<Index>(corr.beta.size()) != m.n3)
    throw DimensionError("apply_gamma_tau: interface vector length mismatch");
  CVector out(static_cast<std::size_t>(m.n1 + m.n2));
  matvec_update(std::span<cplx>(out).first(static_cast<std::size_t>(m.n1)), 1.0, m.r13_alpha, corr.alpha, workers);
  matvec_update(std::span<cplx>(out).subspan(static_cast<std::size_t>(m.n1)), 1.0, m.r23_beta, corr.beta, workers);
  return out;
}

CVector apply_gamma_tau(const MergeOperators& m, std::span<const cplx> h_alpha3, std::span<const cplx> h_beta3,
                        int workers) {
  return apply_gamma_tau(m, apply_upsilon(m, h_alpha3, h_beta3, workers), workers);
}

}  // namespace hps
