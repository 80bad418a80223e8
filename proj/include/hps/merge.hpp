#pragma once

// Merge of two sibling boxes. Only the blocks needed to apply the interface
// corrections and the parent's particular outgoing impedance are kept; the
// correction operators themselves are never formed.

#include <utility>

#include "hps/cmatrix.hpp"
#include "hps/geometry.hpp"

namespace hps {

struct MergeOperators {
  Index n1 = 0, n2 = 0, n3 = 0;
  CMatrix phi_alpha;  // n3 x (n1 + n2): interface data of alpha from parent data
  CMatrix phi_beta;   // n3 x (n1 + n2)
  CMatrix w_inv;      // n3 x n3, inverse of I - R33β R33α
  CMatrix r33_alpha, r33_beta;
  CMatrix r13_alpha;  // n1 x n3
  CMatrix r23_beta;   // n2 x n3
  CMatrix r;          // parent ItI operator; released once the grandparent merges
  double w_condition = 0.0;  // 1-norm condition estimate of W

  /// Bytes held by the blocks retained for the solve stage (excludes r).
  std::size_t retained_bytes() const noexcept;
};

/// Consumes the children's ItI operators. Throws SingularMatrixError if W is
/// singular (the message carries the condition estimate when available).
MergeOperators merge(CMatrix r_alpha, CMatrix r_beta, const SiblingIndexSets& idx, int workers = 1);

struct InterfaceCorrections {
  CVector alpha;  // t̃α on the interface
  CVector beta;   // t̃β
};

InterfaceCorrections apply_upsilon(const MergeOperators& m, std::span<const cplx> h_alpha3,
                                   std::span<const cplx> h_beta3, int workers = 1);

/// Interface contribution to the parent's particular outgoing impedance,
/// [R13α t̃α; R23β t̃β]. The caller adds [hα(I_1); hβ(I_2)].
CVector apply_gamma_tau(const MergeOperators& m, std::span<const cplx> h_alpha3, std::span<const cplx> h_beta3,
                        int workers = 1);
CVector apply_gamma_tau(const MergeOperators& m, const InterfaceCorrections& corr, int workers = 1);

}  // namespace hps
