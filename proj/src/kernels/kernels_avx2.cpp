// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "packing.hpp"

namespace hps::kernels {

namespace {

inline void micro_avx2(Index kc, const double* ap, const double* bp, double* acc) {
  __m256d cr0 = _mm256_setzero_pd(), ci0 = _mm256_setzero_pd();
  __m256d cr1 = _mm256_setzero_pd(), ci1 = _mm256_setzero_pd();
  __m256d cr2 = _mm256_setzero_pd(), ci2 = _mm256_setzero_pd();
  __m256d cr3 = _mm256_setzero_pd(), ci3 = _mm256_setzero_pd();
  for (Index p = 0; p < kc; ++p) {
    const __m256d ar = _mm256_loadu_pd(ap);
    const __m256d ai = _mm256_loadu_pd(ap + 4);
    __m256d br = _mm256_broadcast_sd(bp + 0);
    __m256d bi = _mm256_broadcast_sd(bp + 1);
    cr0 = _mm256_fmadd_pd(ar, br, cr0);
    cr0 = _mm256_fnmadd_pd(ai, bi, cr0);
    ci0 = _mm256_fmadd_pd(ar, bi, ci0);
    ci0 = _mm256_fmadd_pd(ai, br, ci0);
    br = _mm256_broadcast_sd(bp + 2);
    bi = _mm256_broadcast_sd(bp + 3);
    cr1 = _mm256_fmadd_pd(ar, br, cr1);
    cr1 = _mm256_fnmadd_pd(ai, bi, cr1);
    ci1 = _mm256_fmadd_pd(ar, bi, ci1);
    ci1 = _mm256_fmadd_pd(ai, br, ci1);
    br = _mm256_broadcast_sd(bp + 4);
    bi = _mm256_broadcast_sd(bp + 5);
    cr2 = _mm256_fmadd_pd(ar, br, cr2);
    cr2 = _mm256_fnmadd_pd(ai, bi, cr2);
    ci2 = _mm256_fmadd_pd(ar, bi, ci2);
    ci2 = _mm256_fmadd_pd(ai, br, ci2);
    br = _mm256_broadcast_sd(bp + 6);
    bi = _mm256_broadcast_sd(bp + 7);
    cr3 = _mm256_fmadd_pd(ar, br, cr3);
    cr3 = _mm256_fnmadd_pd(ai, bi, cr3);
    ci3 = _mm256_fmadd_pd(ar, bi, ci3);
    ci3 = _mm256_fmadd_pd(ai, br, ci3);
    ap += 8;
    bp += 8;
  }
  _mm256_store_pd(acc + 0, cr0);
  _mm256_store_pd(acc + 4, ci0);
  _mm256_store_pd(acc + 8, cr1);
  _mm256_store_pd(acc + 12, ci1);
  _mm256_store_pd(acc + 16, cr2);
  _mm256_store_pd(acc + 20, ci2);
  _mm256_store_pd(acc + 24, cr3);
  _mm256_store_pd(acc + 28, ci3);
}

void gemm_update_avx2(Index m, Index n, Index k, cplx alpha, const cplx* a, Index lda, const cplx* b, Index ldb,
                      cplx* c, Index ldc) {
  packed_gemm(m, n, k, alpha, a, lda, b, ldb, c, ldc, micro_avx2);
}

// acc holds sum a*xr, acc_i holds sum a*xi in interleaved (re, im) layout;
// the product is acc + i*acc_i.
inline __m256d combine(__m256d acc, __m256d acc_i) {
  return _mm256_addsub_pd(acc, _mm256_permute_pd(acc_i, 0b0101));
}

inline void add_scaled(cplx* y, const double* s, Index count, cplx alpha) {
  for (Index t = 0; t < count; ++t) {
    const double sr = s[2 * t], si = s[2 * t + 1];
    y[t] = {y[t].real() + (alpha.real() * sr - alpha.imag() * si),
            y[t].imag() + (alpha.real() * si + alpha.imag() * sr)};
  }
}

void gemv_update_avx2(Index m, Index n, cplx alpha, const cplx* a, Index lda, const cplx* x, cplx* y) {
  const auto* xd = reinterpret_cast<const double*>(x);
  alignas(32) double out[2 * kGemvRowBlock];
  Index i = 0;
  for (; i + kGemvRowBlock <= m; i += kGemvRowBlock) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd(), s2 = _mm256_setzero_pd(),
            s3 = _mm256_setzero_pd();
    __m256d t0 = _mm256_setzero_pd(), t1 = _mm256_setzero_pd(), t2 = _mm256_setzero_pd(),
            t3 = _mm256_setzero_pd();
    for (Index p = 0; p < n; ++p) {
      const auto* col = reinterpret_cast<const double*>(a + i + p * lda);
      const __m256d xr = _mm256_broadcast_sd(xd + 2 * p);
      const __m256d xi = _mm256_broadcast_sd(xd + 2 * p + 1);
      const __m256d a0 = _mm256_loadu_pd(col), a1 = _mm256_loadu_pd(col + 4), a2 = _mm256_loadu_pd(col + 8),
                    a3 = _mm256_loadu_pd(col + 12);
      s0 = _mm256_fmadd_pd(a0, xr, s0);
      s1 = _mm256_fmadd_pd(a1, xr, s1);
      s2 = _mm256_fmadd_pd(a2, xr, s2);
      s3 = _mm256_fmadd_pd(a3, xr, s3);
      t0 = _mm256_fmadd_pd(a0, xi, t0);
      t1 = _mm256_fmadd_pd(a1, xi, t1);
      t2 = _mm256_fmadd_pd(a2, xi, t2);
      t3 = _mm256_fmadd_pd(a3, xi, t3);
    }
    _mm256_store_pd(out + 0, combine(s0, t0));
    _mm256_store_pd(out + 4, combine(s1, t1));
    _mm256_store_pd(out + 8, combine(s2, t2));
    _mm256_store_pd(out + 12, combine(s3, t3));
    add_scaled(y + i, out, kGemvRowBlock, alpha);
  }
  // Tail: pairs of rows, then a final single row.
  for (; i < m; i += 2) {
    const Index rows = std::min<Index>(2, m - i);
    __m256d s = _mm256_setzero_pd(), t = _mm256_setzero_pd();
    if (rows == 2) {
      for (Index p = 0; p < n; ++p) {
        const __m256d av = _mm256_loadu_pd(reinterpret_cast<const double*>(a + i + p * lda));
        s = _mm256_fmadd_pd(av, _mm256_broadcast_sd(xd + 2 * p), s);
        t = _mm256_fmadd_pd(av, _mm256_broadcast_sd(xd + 2 * p + 1), t);
      }
    } else {
      for (Index p = 0; p < n; ++p) {
        const __m128d lo = _mm_loadu_pd(reinterpret_cast<const double*>(a + i + p * lda));
        const __m256d av = _mm256_insertf128_pd(_mm256_setzero_pd(), lo, 0);
        s = _mm256_fmadd_pd(av, _mm256_broadcast_sd(xd + 2 * p), s);
        t = _mm256_fmadd_pd(av, _mm256_broadcast_sd(xd + 2 * p + 1), t);
      }
    }
    _mm256_store_pd(out, combine(s, t));
    add_scaled(y + i, out, rows, alpha);
  }
}

const KernelSet kAvx2{"avx2", &gemm_update_avx2, &gemv_update_avx2};

}  // namespace

const KernelSet* avx2_kernels() noexcept { return &kAvx2; }

}  // namespace hps::kernels
