#pragma once

// Packing and blocking shared by the SIMD gemm variants. Included only by the
// per-ISA translation units; everything has internal linkage so code compiled
// with different target flags never gets merged by the linker.

#include <algorithm>

#include "hps/simd_kernels.hpp"

namespace hps::kernels {
namespace {

constexpr Index kBlockK = 256;
constexpr Index kBlockM = 64;
constexpr Index kBlockN = 256;

// A panel: for each p, 4 real parts then 4 imaginary parts (rows padded with 0).
inline void pack_a(Index mc, Index kc, const cplx* a, Index lda, double* dst) {
  for (Index r0 = 0; r0 < mc; r0 += kTileRows) {
    const Index rows = std::min(kTileRows, mc - r0);
    for (Index p = 0; p < kc; ++p) {
      const cplx* src = a + r0 + p * lda;
      for (Index ii = 0; ii < kTileRows; ++ii) {
        const cplx v = ii < rows ? src[ii] : cplx{};
        dst[ii] = v.real();
        dst[kTileRows + ii] = v.imag();
      }
      dst += 2 * kTileRows;
    }
  }
}

// B panel: for each p, (re, im) of 4 consecutive columns (columns padded with 0).
inline void pack_b(Index kc, Index nc, const cplx* b, Index ldb, double* dst) {
  for (Index c0 = 0; c0 < nc; c0 += kTileCols) {
    const Index cols = std::min(kTileCols, nc - c0);
    for (Index p = 0; p < kc; ++p) {
      for (Index jj = 0; jj < kTileCols; ++jj) {
        const cplx v = jj < cols ? b[p + (c0 + jj) * ldb] : cplx{};
        dst[2 * jj] = v.real();
        dst[2 * jj + 1] = v.imag();
      }
      dst += 2 * kTileCols;
    }
  }
}

inline Index round_up(Index v, Index m) { return (v + m - 1) / m * m; }

// Micro-kernel contract: acc[j * 8 + ii] = Re, acc[j * 8 + 4 + ii] = Im of
// sum_p A(ii, p) * B(p, j) over one packed A panel and one packed B panel.
template <class MicroKernel>
void packed_gemm(Index m, Index n, Index k, cplx alpha, const cplx* a, Index lda, const cplx* b, Index ldb, cplx* c,
                 Index ldc, MicroKernel micro) {
  if (m <= 0 || n <= 0 || k <= 0) return;
  double* ap = scratch(0, static_cast<std::size_t>(kBlockM * kBlockK * 2));
  double* bp = scratch(1, static_cast<std::size_t>(round_up(kBlockN, kTileCols) * kBlockK * 2));
  alignas(64) double acc[kTileRows * kTileCols * 2];

  for (Index jc = 0; jc < n; jc += kBlockN) {
    const Index nc = std::min(kBlockN, n - jc);
    for (Index pc = 0; pc < k; pc += kBlockK) {
      const Index kc = std::min(kBlockK, k - pc);
      pack_b(kc, nc, b + pc + jc * ldb, ldb, bp);
      for (Index ic = 0; ic < m; ic += kBlockM) {
        const Index mc = std::min(kBlockM, m - ic);
        pack_a(mc, kc, a + ic + pc * lda, lda, ap);
        for (Index jr = 0; jr < nc; jr += kTileCols) {
          const Index cols = std::min(kTileCols, nc - jr);
          const double* bpanel = bp + (jr / kTileCols) * kc * 2 * kTileCols;
          for (Index ir = 0; ir < mc; ir += kTileRows) {
            const Index rows = std::min(kTileRows, mc - ir);
            const double* apanel = ap + (ir / kTileRows) * kc * 2 * kTileRows;
            micro(kc, apanel, bpanel, acc);
            for (Index jj = 0; jj < cols; ++jj) {
              cplx* cc = c + (ic + ir) + (jc + jr + jj) * ldc;
              const double* aj = acc + jj * 2 * kTileRows;
              for (Index ii = 0; ii < rows; ++ii) {
                const double sr = aj[ii];
                const double si = aj[kTileRows + ii];
                cc[ii] = {cc[ii].real() + (alpha.real() * sr - alpha.imag() * si),
                          cc[ii].imag() + (alpha.real() * si + alpha.imag() * sr)};
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace
}  // namespace hps::kernels
