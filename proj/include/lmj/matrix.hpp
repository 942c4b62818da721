#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lmj {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Row-wise literal, e.g. Matrix{{1, 2}, {3, 4}}. Rows must have equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  /// Copy of the block starting at (r0, c0).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& src);

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

/// Standard product. Throws InvalidInput when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);
/// m * x. Throws InvalidInput on length mismatch.
Vector matvec(const Matrix& m, std::span<const double> x);

/// Lower-triangular S with S S^T = m for symmetric positive semidefinite m.
///
/// Cholesky with a small-pivot rule: a pivot in [-1e-10, 1e-10] zeroes its
/// column, so semidefinite inputs (including the zero matrix) are accepted.
/// A pivot below -1e-10 throws NumericDomain.
Matrix matrix_sqrt_psd(const Matrix& m);

/// Inverse of a symmetric positive definite matrix. Throws NumericDomain when
/// a Cholesky pivot is not strictly positive.
Matrix spd_inverse(const Matrix& m);

/// (m + m^T) / 2; m must be square.
Matrix symmetrized(const Matrix& m);

/// Block-diagonal [a 0; 0 b].
Matrix block_diag(const Matrix& a, const Matrix& b);

/// Max absolute row sum.
double norm_inf(const Matrix& m);
double max_abs(std::span<const double> v);
bool all_finite(std::span<const double> v);

}  // namespace lmj
