#pragma once

// Dense complex linear algebra used by the leaf factory, the merge and the
// solve sweeps. Every entry point takes the number of cooperating workers
// ("inner threads") for that call. Results do not depend on the worker count:
// work is split on kernel tile boundaries so each output entry is produced by
// the same operation sequence.

#include <atomic>
#include <span>
#include <vector>

#include "hps/cmatrix.hpp"

namespace hps {

/// Returns A * B.
CMatrix gemm(const CMatrix& a, const CMatrix& b, int workers = 1);

/// C += alpha * A * B.
void gemm_update(CMatrix& c, cplx alpha, const CMatrix& a, const CMatrix& b, int workers = 1);

/// Returns A * x.
CVector matvec(const CMatrix& a, std::span<const cplx> x, int workers = 1);

/// y += alpha * A * x.
void matvec_update(std::span<cplx> y, cplx alpha, const CMatrix& a, std::span<const cplx> x, int workers = 1);

/// LU factorization with partial (row) pivoting, P A = L U.
class LUFactorization {
 public:
  LUFactorization(CMatrix lu, std::vector<Index> pivots) : lu_(std::move(lu)), pivots_(std::move(pivots)) {}

  Index size() const noexcept { return lu_.rows(); }
  const CMatrix& packed() const noexcept { return lu_; }
  /// pivots()[j] is the row swapped with row j at step j.
  const std::vector<Index>& pivots() const noexcept { return pivots_; }

  /// Explicit inverse, computed as U^{-1} L^{-1} followed by column swaps.
  CMatrix inverse(int workers = 1) const;
  CVector solve(std::span<const cplx> b) const;

 private:
  CMatrix lu_;
  std::vector<Index> pivots_;
};

/// Throws SingularMatrixError when a pivot is below n * eps * max|A|.
LUFactorization lu_factor(CMatrix a, int workers = 1);

/// Inverse of a square nonsingular matrix via LU with partial pivoting.
CMatrix lu_invert(const CMatrix& a, int workers = 1);

/// 1-norm condition number from a matrix and its computed inverse.
double condition_one(const CMatrix& a, const CMatrix& a_inv) noexcept;

/// Process-wide operation counters (relaxed atomics).
struct OpCounters {
  std::atomic<long> factorizations{0};
  std::atomic<long> gemms{0};
  std::atomic<long> matvecs{0};
};

OpCounters& op_counters() noexcept;

}  // namespace hps
