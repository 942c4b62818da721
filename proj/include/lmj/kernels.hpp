#pragma once

// Dense inner-loop kernels shared by the matrix and network code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at first use from CPUID; the
// environment variable LMJ_KERNELS=scalar forces the reference path. The two
// paths agree to rounding (summation order differs), not bit-for-bit, so a
// given machine always runs one path for the life of the process.

#include <cstddef>
#include <span>
#include <string_view>

namespace lmj::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = W x + b for row-major W (rows x cols); b may be null.
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
               const double* b, double* y);
  // y += W^T x for row-major W (rows x cols); x has rows entries, y has cols.
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                     double* y);
  // W += a x^T (rank-1 update); a has rows entries, x has cols.
  void (*outer_acc)(double* w, std::size_t rows, std::size_t cols, const double* a,
                    const double* x);
};

const KernelTable& scalar_table();
/// Returns nullptr when the host cannot run AVX2+FMA or the build lacks it.
const KernelTable* avx2_table();
/// The table selected for this process.
const KernelTable& active();

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace lmj::kernels
