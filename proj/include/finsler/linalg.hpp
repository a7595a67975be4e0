#pragma once

// Small dense matrices over double or Jet, with Gaussian elimination that
// pivots on the value part.  Everything here is at desk scale (<= 8x8).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"

namespace finsler {

template <typename T>
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(int rows, int cols, const T& init = T{})
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, init) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int i, int j) { return v_[std::size_t(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return v_[std::size_t(i) * cols_ + j]; }
  const std::vector<T>& data() const { return v_; }

 private:
  int rows_, cols_;
  std::vector<T> v_;
};

using DMat = Mat<double>;

inline double pivot_weight(double x) { return std::abs(x); }
inline double pivot_weight(const Jet& x) { return std::abs(x.value()); }

// Solves A x = b by elimination with partial pivoting decided on value
// parts.  For Jet entries the result is exact at the stored order; a
// singular value-part matrix raises DegenerateError.
template <typename T>
std::vector<T> solve_linear(Mat<T> a, std::vector<T> b) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n)
    throw std::invalid_argument("solve_linear: shape mismatch");
  double scale = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, pivot_weight(a(i, j)));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (pivot_weight(a(r, col)) > pivot_weight(a(piv, col))) piv = r;
    if (pivot_weight(a(piv, col)) < 1e-13 * scale)
      throw DegenerateError("solve_linear: singular value-part matrix");
    if (piv != col) {
      for (int j = col; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      T f = a(r, col) / a(col, col);
      for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  for (int row = n - 1; row >= 0; --row) {
    for (int j = row + 1; j < n; ++j) b[row] -= a(row, j) * b[j];
    b[row] = b[row] / a(row, row);
  }
  return b;
}

template <typename T>
T determinant(Mat<T> a) {
  const int n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("determinant: square matrix required");
  double scale = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, pivot_weight(a(i, j)));
  double sign = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (pivot_weight(a(r, col)) > pivot_weight(a(piv, col))) piv = r;
    if (pivot_weight(a(piv, col)) < 1e-13 * scale)
      throw DegenerateError("determinant: singular value-part matrix");
    if (piv != col) {
      sign = -sign;
      for (int j = col; j < n; ++j) std::swap(a(col, j), a(piv, j));
    }
    for (int r = col + 1; r < n; ++r) {
      T f = a(r, col) / a(col, col);
      for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  T det = a(0, 0);
  for (int i = 1; i < n; ++i) det = det * a(i, i);
  return det * sign;
}

inline DMat inverse(const DMat& a) {
  const int n = a.rows();
  DMat inv(n, n, 0.0);
  for (int col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    std::vector<double> x = solve_linear(a, e);
    for (int r = 0; r < n; ++r) inv(r, col) = x[r];
  }
  return inv;
}

inline double norm_inf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <typename T>
double norm_inf(const Mat<T>& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(pivot_weight(a(i, j))));
  return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Sylvester criterion; used only as informational metadata.
inline bool positive_definite(const DMat& g) {
  const int n = g.rows();
  for (int k = 1; k <= n; ++k) {
    DMat minor(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) minor(i, j) = g(i, j);
    try {
      if (determinant(minor) <= 0.0) return false;
    } catch (const DegenerateError&) {
      return false;
    }
  }
  return true;
}

}  // namespace finsler
