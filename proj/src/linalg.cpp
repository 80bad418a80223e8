#include "hps/linalg.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hps/parallel.hpp"
#include "hps/simd_kernels.hpp"

namespace hps {

namespace {

constexpr Index kLuBlock = 64;
// Below this many complex multiply-adds a call is not worth splitting.
constexpr Index kParallelCutoff = 32 * 32 * 32;

inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline cplx reciprocal(cplx a) {
  const double d = a.real() * a.real() + a.imag() * a.imag();
  return {a.real() / d, -a.imag() / d};
}

inline double cabs1(cplx a) { return std::abs(a.real()) + std::abs(a.imag()); }

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }
Index round_up(Index a, Index m) { return ceil_div(a, m) * m; }

void check_finite(std::span<const cplx> x, const char* where) {
  if (!all_finite(x)) throw NonFiniteError(std::string(where) + ": non-finite value in result");
}

// C(m x n) += alpha A(m x k) B(k x n), split across workers along the longer
// output dimension on tile boundaries.
void gemm_raw(Index m, Index n, Index k, cplx alpha, const cplx* a, Index lda, const cplx* b, Index ldb, cplx* c,
              Index ldc, int workers) {
  if (m <= 0 || n <= 0 || k <= 0) return;
  const kernels::KernelSet& ks = kernels::active();
  if (workers <= 1 || m * n * k < kParallelCutoff) {
    ks.gemm_update(m, n, k, alpha, a, lda, b, ldb, c, ldc);
    return;
  }
  if (n >= m) {
    const Index width = round_up(ceil_div(n, workers), kernels::kTileCols);
    const Index chunks = ceil_div(n, width);
    parallel_chunks(workers, chunks, [&](Index ch) {
      const Index j0 = ch * width;
      const Index nj = std::min(width, n - j0);
      ks.gemm_update(m, nj, k, alpha, a, lda, b + j0 * ldb, ldb, c + j0 * ldc, ldc);
    });
  } else {
    const Index height = round_up(ceil_div(m, workers), kernels::kTileRows);
    const Index chunks = ceil_div(m, height);
    parallel_chunks(workers, chunks, [&](Index ch) {
      const Index i0 = ch * height;
      const Index mi = std::min(height, m - i0);
      ks.gemm_update(mi, n, k, alpha, a + i0, lda, b, ldb, c + i0, ldc);
    });
  }
}

}  // namespace

OpCounters& op_counters() noexcept {
  static OpCounters counters;
  return counters;
}

void enable_nested_parallelism() {
  static std::once_flag once;
  std::call_once(once, [] { omp_set_max_active_levels(2); });
}

int hardware_threads() { return omp_get_num_procs(); }

namespace {
// Nested regions are needed as soon as the library is loaded.
[[maybe_unused]] const bool nested_enabled = [] {
  enable_nested_parallelism();
  return true;
}();
}  // namespace

void gemm_update(CMatrix& c, cplx alpha, const CMatrix& a, const CMatrix& b, int workers) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw DimensionError("gemm: dimension mismatch (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + " -> " +
                         std::to_string(c.rows()) + "x" + std::to_string(c.cols()) + ")");
  if (workers < 1) throw std::invalid_argument("gemm: workers must be >= 1");
  op_counters().gemms.fetch_add(1, std::memory_order_relaxed);
  gemm_raw(a.rows(), b.cols(), a.cols(), alpha, a.data(), a.ld(), b.data(), b.ld(), c.data(), c.ld(), workers);
  check_finite({c.data(), c.size()}, "gemm");
}

CMatrix gemm(const CMatrix& a, const CMatrix& b, int workers) {
  CMatrix c(a.rows(), b.cols());
  gemm_update(c, 1.0, a, b, workers);
  return c;
}

void matvec_update(std::span<cplx> y, cplx alpha, const CMatrix& a, std::span<const cplx> x, int workers) {
  if (static_cast<Index>(x.size()) != a.cols() || static_cast<Index>(y.size()) != a.rows())
    throw DimensionError("matvec: dimension mismatch (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " * " + std::to_string(x.size()) + ")");
  if (workers < 1) throw std::invalid_argument("matvec: workers must be >= 1");
  op_counters().matvecs.fetch_add(1, std::memory_order_relaxed);
  const Index m = a.rows(), n = a.cols();
  if (m == 0) return;
  const kernels::KernelSet& ks = kernels::active();
  if (workers <= 1 || m * n < kParallelCutoff) {
    ks.gemv_update(m, n, alpha, a.data(), a.ld(), x.data(), y.data());
  } else {
    const Index height = round_up(ceil_div(m, workers), kernels::kGemvRowBlock);
    const Index chunks = ceil_div(m, height);
    parallel_chunks(workers, chunks, [&](Index ch) {
      const Index i0 = ch * height;
      ks.gemv_update(std::min(height, m - i0), n, alpha, a.data() + i0, a.ld(), x.data(), y.data() + i0);
    });
  }
  check_finite(y, "matvec");
}

CVector matvec(const CMatrix& a, std::span<const cplx> x, int workers) {
  CVector y(static_cast<std::size_t>(a.rows()));
  matvec_update(y, 1.0, a, x, workers);
  return y;
}

LUFactorization lu_factor(CMatrix a, int workers) {
  if (a.rows() != a.cols()) throw DimensionError("lu_factor: matrix is not square");
  if (workers < 1) throw std::invalid_argument("lu_factor: workers must be >= 1");
  op_counters().factorizations.fetch_add(1, std::memory_order_relaxed);
  const Index n = a.rows();
  const double threshold = static_cast<double>(std::max<Index>(n, 1)) * std::numeric_limits<double>::epsilon() *
                           norm_max(a);
  std::vector<Index> piv(static_cast<std::size_t>(n));
  cplx* d = a.data();
  const Index ld = a.ld();
  auto at = [&](Index i, Index j) -> cplx& { return d[i + j * ld]; };

  for (Index k0 = 0; k0 < n; k0 += kLuBlock) {
    const Index kb = std::min(kLuBlock, n - k0);
    const Index kend = k0 + kb;
    for (Index j = k0; j < kend; ++j) {
      Index p = j;
      double best = cabs1(at(j, j));
      for (Index i = j + 1; i < n; ++i) {
        const double v = cabs1(at(i, j));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      piv[static_cast<std::size_t>(j)] = p;
      if (p != j)
        for (Index c = 0; c < n; ++c) std::swap(at(j, c), at(p, c));
      const double mag = std::abs(at(j, j));
      if (!(mag > threshold))
        throw SingularMatrixError("lu_factor: numerically zero pivot at index " + std::to_string(j), j, mag);
      const cplx inv = reciprocal(at(j, j));
      for (Index i = j + 1; i < n; ++i) at(i, j) = mul(at(i, j), inv);
      for (Index c = j + 1; c < kend; ++c) {
        const cplx ujc = at(j, c);
        for (Index i = j + 1; i < n; ++i) at(i, c) -= mul(at(i, j), ujc);
      }
    }
    if (kend < n) {
      const Index rest = n - kend;
      const Index width = round_up(ceil_div(rest, std::max(workers, 1)), kernels::kTileCols);
      const Index chunks = ceil_div(rest, width);
      parallel_chunks(rest * kb * kb < kParallelCutoff ? 1 : workers, chunks, [&](Index ch) {
        const Index c0 = kend + ch * width;
        const Index c1 = std::min(n, c0 + width);
        for (Index c = c0; c < c1; ++c)
          for (Index j = k0; j < kend; ++j) {
            const cplx ujc = at(j, c);
            for (Index i = j + 1; i < kend; ++i) at(i, c) -= mul(at(i, j), ujc);
          }
      });
      gemm_raw(rest, rest, kb, -1.0, &at(kend, k0), ld, &at(k0, kend), ld, &at(kend, kend), ld, workers);
    }
  }
  return LUFactorization(std::move(a), std::move(piv));
}

CMatrix LUFactorization::inverse(int workers) const {
  const Index n = size();
  CMatrix x = CMatrix::identity(n);
  if (n == 0) return x;
  const cplx* lu = lu_.data();
  cplx* xd = x.data();
  const kernels::KernelSet& ks = kernels::active();
  auto L = [&](Index i, Index j) { return lu[i + j * n]; };

  // Solves columns [j0, j1) of U X = L^{-1} I in place. Rows above j0 stay
  // zero in the forward sweep, so it starts at the block containing j0.
  auto solve_columns = [&](Index j0, Index j1) {
    const Index width = j1 - j0;
    auto X = [&](Index i, Index j) -> cplx& { return xd[i + j * n]; };
    for (Index k0 = (j0 / kLuBlock) * kLuBlock; k0 < n; k0 += kLuBlock) {
      const Index kend = std::min(n, k0 + kLuBlock);
      for (Index c = j0; c < j1; ++c)
        for (Index j = k0; j < kend; ++j) {
          const cplx xj = X(j, c);
          for (Index i = j + 1; i < kend; ++i) X(i, c) -= mul(L(i, j), xj);
        }
      if (kend < n) ks.gemm_update(n - kend, width, kend - k0, -1.0, lu + kend + k0 * n, n, &X(k0, j0), n, &X(kend, j0), n);
    }
    for (Index k0 = ((n - 1) / kLuBlock) * kLuBlock; k0 >= 0; k0 -= kLuBlock) {
      const Index kend = std::min(n, k0 + kLuBlock);
      for (Index c = j0; c < j1; ++c)
        for (Index j = kend - 1; j >= k0; --j) {
          X(j, c) = mul(X(j, c), reciprocal(L(j, j)));
          const cplx xj = X(j, c);
          for (Index i = k0; i < j; ++i) X(i, c) -= mul(L(i, j), xj);
        }
      if (k0 > 0) ks.gemm_update(k0, width, kend - k0, -1.0, lu + k0 * n, n, &X(k0, j0), n, &X(0, j0), n);
    }
  };

  const int w = n * n * n < kParallelCutoff ? 1 : std::max(workers, 1);
  const Index width = std::max<Index>(2 * kernels::kTileCols, round_up(ceil_div(n, 2 * w), kernels::kTileCols));
  const Index chunks = ceil_div(n, width);
  parallel_chunks(w, chunks, [&](Index ch) {
    const Index j0 = ch * width;
    solve_columns(j0, std::min(n, j0 + width));
  });

  for (Index j = n - 1; j >= 0; --j) {
    const Index p = pivots_[static_cast<std::size_t>(j)];
    if (p != j) std::swap_ranges(xd + j * n, xd + (j + 1) * n, xd + p * n);
  }
  return x;
}

CVector LUFactorization::solve(std::span<const cplx> b) const {
  const Index n = size();
  if (static_cast<Index>(b.size()) != n) throw DimensionError("LUFactorization::solve: length mismatch");
  CVector x(b.begin(), b.end());
  for (Index j = 0; j < n; ++j) std::swap(x[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(pivots_[j])]);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) x[i] -= mul(lu_(i, j), x[j]);
  for (Index j = n - 1; j >= 0; --j) {
    x[j] = mul(x[j], reciprocal(lu_(j, j)));
    for (Index i = 0; i < j; ++i) x[i] -= mul(lu_(i, j), x[j]);
  }
  check_finite(x, "LUFactorization::solve");
  return x;
}

CMatrix lu_invert(const CMatrix& a, int workers) {
  CMatrix inv = lu_factor(a, workers).inverse(workers);
  check_finite({inv.data(), inv.size()}, "lu_invert");
  return inv;
}

double condition_one(const CMatrix& a, const CMatrix& a_inv) noexcept { return norm_one(a) * norm_one(a_inv); }

}  // namespace hps
