#include "lmj/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmj/error.hpp"
#include "lmj/kernels.hpp"

namespace lmj {

namespace {
constexpr double kPivotTolerance = 1e-10;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidInput("Matrix: ragged row literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols, std::vector<double> data) {
  if (data.size() != rows * cols) throw InvalidInput("Matrix::from_rows: data length mismatch");
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
  if (r0 + rows > rows_ || c0 + cols > cols_) throw InvalidInput("Matrix::block out of range");
  Matrix b(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& src) {
  if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_)
    throw InvalidInput("Matrix::set_block out of range");
  for (std::size_t r = 0; r < src.rows(); ++r)
    for (std::size_t c = 0; c < src.cols(); ++c) (*this)(r0 + r, c0 + c) = src(r, c);
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw InvalidInput("Matrix +=: " + shape(*this) + " vs " + shape(other));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw InvalidInput("Matrix -=: " + shape(*this) + " vs " + shape(other));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw InvalidInput("matmul: dimension mismatch " + shape(a) + " * " + shape(b));
  Matrix out(a.rows(), b.cols());
  const auto& k = kernels::active();
  // Row i of the product is sum_j a(i, j) * row j of b.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t j = 0; j < a.cols(); ++j) k.axpy(a(i, j), b.row(j).data(), dst, b.cols());
  }
  return out;
}

Vector matvec(const Matrix& m, std::span<const double> x) {
  if (m.cols() != x.size())
    throw InvalidInput("matvec: " + shape(m) + " times length " + std::to_string(x.size()));
  Vector y(m.rows());
  kernels::active().gemv(m.data().data(), m.rows(), m.cols(), x.data(), nullptr, y.data());
  return y;
}

Matrix matrix_sqrt_psd(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("matrix_sqrt_psd: non-square " + shape(m));
  const std::size_t n = m.rows();
  Matrix s(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= s(j, k) * s(j, k);
    if (!std::isfinite(pivot) || pivot < -kPivotTolerance) {
      throw NumericDomain("matrix_sqrt_psd: matrix is not positive semidefinite (pivot " +
                          std::to_string(pivot) + " at " + std::to_string(j) + ")");
    }
    if (pivot <= kPivotTolerance) continue;  // semidefinite direction: column stays zero
    const double d = std::sqrt(pivot);
    s(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = m(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= s(i, k) * s(j, k);
      s(i, j) = v / d;
    }
  }
  return s;
}

Matrix spd_inverse(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("spd_inverse: non-square " + shape(m));
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot))
      throw NumericDomain("spd_inverse: matrix is singular or indefinite");
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = m(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / d;
    }
  }
  // Invert L by forward substitution, then inv(m) = inv(L)^T inv(L).
  Matrix linv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = c; i < n; ++i) {
      double v = (i == c) ? 1.0 : 0.0;
      for (std::size_t k = c; k < i; ++k) v -= l(i, k) * linv(k, c);
      linv(i, c) = v / l(i, i);
    }
  }
  return symmetrized(matmul(linv.transposed(), linv));
}

Matrix symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("symmetrized: non-square " + shape(m));
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
  return out;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols() + b.cols());
  out.set_block(0, 0, a);
  out.set_block(a.rows(), a.cols(), b);
  return out;
}

double norm_inf(const Matrix& m) {
  double best = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (double v : m.row(r)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double max_abs(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace lmj
