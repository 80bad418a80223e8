// AArch64 only. Same blocking as the AVX2 variant with 128-bit registers.

#include <arm_neon.h>

#include "packing.hpp"

namespace hps::kernels {

namespace {

inline void micro_neon(Index kc, const double* ap, const double* bp, double* acc) {
  // Two float64x2 per 4-row panel half; c[j][0..1] real rows 0-1/2-3, c[j][2..3] imag.
  float64x2_t cr[4][2], ci[4][2];
  for (int j = 0; j < 4; ++j)
    for (int h = 0; h < 2; ++h) cr[j][h] = ci[j][h] = vdupq_n_f64(0.0);
  for (Index p = 0; p < kc; ++p) {
    const float64x2_t ar0 = vld1q_f64(ap), ar1 = vld1q_f64(ap + 2);
    const float64x2_t ai0 = vld1q_f64(ap + 4), ai1 = vld1q_f64(ap + 6);
    for (int j = 0; j < 4; ++j) {
      const float64x2_t br = vdupq_n_f64(bp[2 * j]);
      const float64x2_t bi = vdupq_n_f64(bp[2 * j + 1]);
      cr[j][0] = vfmsq_f64(vfmaq_f64(cr[j][0], ar0, br), ai0, bi);
      cr[j][1] = vfmsq_f64(vfmaq_f64(cr[j][1], ar1, br), ai1, bi);
      ci[j][0] = vfmaq_f64(vfmaq_f64(ci[j][0], ar0, bi), ai0, br);
      ci[j][1] = vfmaq_f64(vfmaq_f64(ci[j][1], ar1, bi), ai1, br);
    }
    ap += 8;
    bp += 8;
  }
  for (int j = 0; j < 4; ++j) {
    vst1q_f64(acc + 8 * j + 0, cr[j][0]);
    vst1q_f64(acc + 8 * j + 2, cr[j][1]);
    vst1q_f64(acc + 8 * j + 4, ci[j][0]);
    vst1q_f64(acc + 8 * j + 6, ci[j][1]);
  }
}

void gemm_update_neon(Index m, Index n, Index k, cplx alpha, const cplx* a, Index lda, const cplx* b, Index ldb,
                      cplx* c, Index ldc) {
  packed_gemm(m, n, k, alpha, a, lda, b, ldb, c, ldc, micro_neon);
}

void gemv_update_neon(Index m, Index n, cplx alpha, const cplx* a, Index lda, const cplx* x, cplx* y) {
  const auto* xd = reinterpret_cast<const double*>(x);
  const float64x2_t flip = {-1.0, 1.0};
  for (Index i = 0; i < m; ++i) {
    float64x2_t s = vdupq_n_f64(0.0), t = vdupq_n_f64(0.0);
    for (Index p = 0; p < n; ++p) {
      const float64x2_t av = vld1q_f64(reinterpret_cast<const double*>(a + i + p * lda));
      s = vfmaq_f64(s, av, vdupq_n_f64(xd[2 * p]));
      t = vfmaq_f64(t, av, vdupq_n_f64(xd[2 * p + 1]));
    }
    // s + i*t: (s.re - t.im, s.im + t.re)
    const float64x2_t r = vfmaq_f64(s, vextq_f64(t, t, 1), flip);
    const double sr = vgetq_lane_f64(r, 0), si = vgetq_lane_f64(r, 1);
    y[i] = {y[i].real() + (alpha.real() * sr - alpha.imag() * si), y[i].imag() + (alpha.real() * si + alpha.imag() * sr)};
  }
}

const KernelSet kNeon{"neon", &gemm_update_neon, &gemv_update_neon};

}  // namespace

const KernelSet* neon_kernels() noexcept { return &kNeon; }

}  // namespace hps::kernels
