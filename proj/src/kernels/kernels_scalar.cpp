#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string_view>

#include "hps/simd_kernels.hpp"

namespace hps::kernels {

namespace {

// Reference loops. Complex products are written out in real arithmetic so the
// compiler never routes them through the NaN-recovering libgcc helpers.

void gemm_update_scalar(Index m, Index n, Index k, cplx alpha, const cplx* a, Index lda, const cplx* b, Index ldb,
                        cplx* c, Index ldc) {
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      double sr = 0.0, si = 0.0;
      for (Index p = 0; p < k; ++p) {
        const cplx av = a[i + p * lda];
        const cplx bv = b[p + j * ldb];
        sr += av.real() * bv.real() - av.imag() * bv.imag();
        si += av.real() * bv.imag() + av.imag() * bv.real();
      }
      cplx& cv = c[i + j * ldc];
      cv = {cv.real() + alpha.real() * sr - alpha.imag() * si, cv.imag() + alpha.real() * si + alpha.imag() * sr};
    }
  }
}

void gemv_update_scalar(Index m, Index n, cplx alpha, const cplx* a, Index lda, const cplx* x, cplx* y) {
  for (Index i = 0; i < m; ++i) {
    double sr = 0.0, si = 0.0;
    for (Index p = 0; p < n; ++p) {
      const cplx av = a[i + p * lda];
      sr += av.real() * x[p].real() - av.imag() * x[p].imag();
      si += av.real() * x[p].imag() + av.imag() * x[p].real();
    }
    y[i] = {y[i].real() + alpha.real() * sr - alpha.imag() * si, y[i].imag() + alpha.real() * si + alpha.imag() * sr};
  }
}

const KernelSet kScalar{"scalar", &gemm_update_scalar, &gemv_update_scalar};

struct AlignedFree {
  void operator()(double* p) const noexcept { std::free(p); }
};

struct ScratchSlot {
  std::unique_ptr<double, AlignedFree> data;
  std::size_t capacity = 0;
};

const KernelSet* initial_choice() noexcept {
  if (const char* env = std::getenv("HPS_KERNELS")) {
    const std::string_view want(env);
    for (const KernelSet* k : {avx2_kernels(), neon_kernels(), &kScalar})
      if (k && want == k->name && cpu_supports(*k)) return k;
  }
  for (const KernelSet* k : {avx2_kernels(), neon_kernels()})
    if (k && cpu_supports(*k)) return k;
  return &kScalar;
}

const KernelSet*& active_slot() noexcept {
  static const KernelSet* chosen = initial_choice();
  return chosen;
}

}  // namespace

const KernelSet& scalar_kernels() noexcept { return kScalar; }

bool cpu_supports(const KernelSet& set) noexcept {
  const std::string_view name(set.name);
  if (name == "scalar") return true;
#if defined(__x86_64__) || defined(__i386__)
  if (name == "avx2") return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#endif
#if defined(__aarch64__)
  if (name == "neon") return true;
#endif
  return false;
}

const KernelSet& active() noexcept { return *active_slot(); }

bool select(std::string_view name) noexcept {
  for (const KernelSet* k : {avx2_kernels(), neon_kernels(), &kScalar}) {
    if (k && name == k->name && cpu_supports(*k)) {
      active_slot() = k;
      return true;
    }
  }
  return false;
}

double* scratch(int slot, std::size_t n_doubles) {
  thread_local ScratchSlot slots[2];
  ScratchSlot& s = slots[slot & 1];
  if (s.capacity < n_doubles) {
    const std::size_t bytes = ((n_doubles * sizeof(double) + 63) / 64) * 64;
    auto* p = static_cast<double*>(std::aligned_alloc(64, bytes));
    if (!p) throw std::bad_alloc();
    s.data.reset(p);
    s.capacity = bytes / sizeof(double);
  }
  return s.data.get();
}

#if !defined(HPS_HAVE_AVX2_KERNELS)
const KernelSet* avx2_kernels() noexcept { return nullptr; }
#endif
#if !defined(HPS_HAVE_NEON_KERNELS)
const KernelSet* neon_kernels() noexcept { return nullptr; }
#endif

}  // namespace hps::kernels
