#pragma once

// Low-level complex BLAS-style kernels with one scalar reference variant and
// SIMD variants (AVX2+FMA on x86-64, NEON on AArch64) chosen at runtime.
//
// All matrices are column-major std::complex<double> with explicit leading
// dimensions. Every variant computes each output entry with a fixed sequence
// of operations that depends only on k (gemm) or n (gemv), never on where the
// entry sits inside the call's m x n range. Callers rely on this to split work
// across threads without changing results.

#include <string_view>

#include "hps/cmatrix.hpp"

namespace hps::kernels {

// Register tile of the packed gemm micro-kernels (complex rows x columns).
// Row/column splits that are multiples of these keep results independent of
// the split.
inline constexpr Index kTileRows = 4;
inline constexpr Index kTileCols = 4;
// gemv processes rows in blocks of this many complex entries.
inline constexpr Index kGemvRowBlock = 8;

struct KernelSet {
  const char* name;
  /// C(m x n) += alpha * A(m x k) * B(k x n)
  void (*gemm_update)(Index m, Index n, Index k, cplx alpha, const cplx* a, Index lda, const cplx* b, Index ldb,
                      cplx* c, Index ldc);
  /// y(m) += alpha * A(m x n) * x(n)
  void (*gemv_update)(Index m, Index n, cplx alpha, const cplx* a, Index lda, const cplx* x, cplx* y);
};

const KernelSet& scalar_kernels() noexcept;
/// nullptr when the variant was not compiled for this target.
const KernelSet* avx2_kernels() noexcept;
const KernelSet* neon_kernels() noexcept;

/// True when the running CPU can execute the given compiled variant.
bool cpu_supports(const KernelSet& set) noexcept;

/// Kernel set used by the linear algebra layer. Chosen on first use: the best
/// supported SIMD variant unless HPS_KERNELS=scalar is set in the environment.
const KernelSet& active() noexcept;

/// Overrides the active set ("scalar", "avx2", "neon"). Returns false when the
/// name is unknown or unsupported on this CPU; the active set is then unchanged.
bool select(std::string_view name) noexcept;

/// Per-thread scratch buffer used by the packed kernels. Slot 0 and 1 are
/// independent. Valid until the next call with the same slot on this thread.
double* scratch(int slot, std::size_t n_doubles);

}  // namespace hps::kernels
