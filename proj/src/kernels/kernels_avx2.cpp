#include "lmj/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define LMJ_HAVE_AVX2_PATH 1
#include <immintrin.h>
#else
#define LMJ_HAVE_AVX2_PATH 0
#endif

namespace lmj::kernels {

#if LMJ_HAVE_AVX2_PATH
namespace {

// Per-function target attributes keep AVX2 code out of inline functions that
// other translation units might pick up through the linker.
#define LMJ_AVX2 __attribute__((target("avx2,fma")))

LMJ_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

LMJ_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

LMJ_AVX2 void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

LMJ_AVX2 void gemv_avx2(const double* w, std::size_t rows, std::size_t cols, const double* x,
                        const double* b, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot_avx2(w + r * cols, x, cols) + (b != nullptr ? b[r] : 0.0);
  }
}

LMJ_AVX2 void gemv_t_acc_avx2(const double* w, std::size_t rows, std::size_t cols,
                              const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(x[r], w + r * cols, y, cols);
}

LMJ_AVX2 void outer_acc_avx2(double* w, std::size_t rows, std::size_t cols, const double* a,
                             const double* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(a[r], x, w + r * cols, cols);
}

#undef LMJ_AVX2

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  static const KernelTable table{Isa::kAvx2, dot_avx2,        axpy_avx2,
                                 gemv_avx2,  gemv_t_acc_avx2, outer_acc_avx2};
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace lmj::kernels
