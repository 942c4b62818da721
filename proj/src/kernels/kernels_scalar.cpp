#include "lmj/kernels.hpp"

namespace lmj::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* b, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot_scalar(w + r * cols, x, cols) + (b != nullptr ? b[r] : 0.0);
  }
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                       double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(x[r], w + r * cols, y, cols);
}

void outer_acc_scalar(double* w, std::size_t rows, std::size_t cols, const double* a,
                      const double* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(a[r], x, w + r * cols, cols);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar, dot_scalar,        axpy_scalar,
                                 gemv_scalar,  gemv_t_acc_scalar, outer_acc_scalar};
  return table;
}

}  // namespace lmj::kernels
