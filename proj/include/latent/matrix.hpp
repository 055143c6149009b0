#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latent {

// Every recoverable failure in the library surfaces as this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw Error("ragged row in matrix literal");
      std::size_t j = 0;
      for (double x : row) m(i, j++) = x;
      ++i;
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Rows are nodes, columns are coordinates or feature channels.
using FeatureMatrix = Matrix;

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error("matrix product: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Matrix operator*(double s, Matrix a) {
  for (double& x : a.values()) x *= s;
  return a;
}

inline Matrix operator+(Matrix a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("matrix sum: shape mismatch");
  auto dst = a.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return a;
}

inline Matrix operator-(Matrix a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("matrix difference: shape mismatch");
  auto dst = a.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return a;
}

inline double frobenius_sq(const Matrix& a) {
  double s = 0.0;
  for (double x : a.values()) s += x * x;
  return s;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

// Infinity norm (max absolute row sum).
inline double norm_inf(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double x : a.row(i)) s += std::abs(x);
    m = std::max(m, s);
  }
  return m;
}

inline std::vector<double> column_means(const Matrix& a) {
  std::vector<double> mean(a.cols(), 0.0);
  if (a.rows() == 0) return mean;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) mean[j] += a(i, j);
  for (double& m : mean) m /= static_cast<double>(a.rows());
  return mean;
}

// C·X with C = I - (1/n) 1 1^T.
inline Matrix center_columns(Matrix a) {
  const auto mean = column_means(a);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= mean[j];
  return a;
}

inline Matrix select_rows(const Matrix& a, std::span<const std::size_t> ids) {
  Matrix out(ids.size(), a.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= a.rows()) throw Error("row index out of range");
    auto src = a.row(ids[r]);
    auto dst = out.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

inline bool all_finite(const Matrix& a) {
  for (double x : a.values())
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace latent
