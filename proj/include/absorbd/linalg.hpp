#pragma once

#include "absorbd/scalar.hpp"
#include "absorbd/simd/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace absorbd {

/// Dense row-major matrix. Sizes here are desk scale (tens of rows).
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0)) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap_ranges(data_.begin() + a * cols_, data_.begin() + (a + 1) * cols_, data_.begin() + b * cols_);
  }

  void append_row(std::span<const T> values) {
    assert(values.size() == cols_ || rows_ == 0);
    if (rows_ == 0) cols_ = values.size();
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {

/// row_dst += factor * row_src, vectorized for doubles.
template <class T>
void add_scaled_row(std::span<T> dst, std::span<const T> src, const T& factor) {
  if constexpr (std::is_same_v<T, double>) {
    simd::axpy(factor, src, dst);
  } else {
    for (std::size_t i = 0; i < dst.size(); ++i)
      if (!src[i].is_zero()) dst[i] += factor * src[i];
  }
}

/// Pivot row choice: first nonzero (exact) or largest magnitude (floating).
template <class T>
std::optional<std::size_t> pick_pivot(const Matrix<T>& m, std::size_t col, std::size_t from, const Arith<T>& ar) {
  std::optional<std::size_t> best;
  if constexpr (Arith<T>::exact) {
    for (std::size_t r = from; r < m.rows(); ++r)
      if (!ar.is_zero(m(r, col))) return r;
  } else {
    double best_abs = 0.0;
    for (std::size_t r = from; r < m.rows(); ++r) {
      double v = std::abs(m(r, col));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best && ar.is_zero(best_abs)) best.reset();
  }
  return best;
}

}  // namespace detail

/// Reduced row echelon form, in place. Returns pivot columns in order.
/// Only the first `pivot_cols` columns are eligible for pivots (augmented
/// right-hand sides stay to the right).
template <class T>
std::vector<std::size_t> rref(Matrix<T>& m, std::size_t pivot_cols, const Arith<T>& ar = {}) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_cols && r < m.rows(); ++c) {
    auto p = detail::pick_pivot(m, c, r, ar);
    if (!p) continue;
    m.swap_rows(r, *p);
    T inv = T(1) / m(r, c);
    for (auto& v : m.row(r)) v *= inv;
    m(r, c) = T(1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || ar.is_zero(m(i, c))) continue;
      T f = -m(i, c);
      detail::add_scaled_row<T>(m.row(i), m.row(r), f);
      m(i, c) = T(0);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

/// Solves A x = b for square A. Empty when A is singular.
template <class T>
std::optional<std::vector<T>> solve_square(const Matrix<T>& a, std::span<const T> b, const Arith<T>& ar = {}) {
  const std::size_t n = a.rows();
  assert(a.cols() == n && b.size() == n);
  Matrix<T> aug(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n) = b[i];
  }
  // Forward elimination then back substitution.
  for (std::size_t c = 0; c < n; ++c) {
    auto p = detail::pick_pivot(aug, c, c, ar);
    if (!p) return std::nullopt;
    aug.swap_rows(c, *p);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (ar.is_zero(aug(i, c))) continue;
      T f = -aug(i, c) / aug(c, c);
      detail::add_scaled_row<T>(aug.row(i), aug.row(c), f);
      aug(i, c) = T(0);
    }
  }
  std::vector<T> x(n);
  for (std::size_t k = n; k-- > 0;) {
    T s = aug(k, n);
    for (std::size_t j = k + 1; j < n; ++j) s -= aug(k, j) * x[j];
    x[k] = s / aug(k, k);
  }
  return x;
}

/// Solves x A = b (row-vector system) for square A.
template <class T>
std::optional<std::vector<T>> solve_left(const Matrix<T>& a, std::span<const T> b, const Arith<T>& ar = {}) {
  return solve_square(a.transposed(), b, ar);
}

/// Solves a possibly non-square system A x = b. Returns one solution (free
/// variables at zero) or empty when inconsistent; `unique` reports full column rank.
template <class T>
struct GeneralSolution {
  std::vector<T> x;
  bool unique = false;
};

template <class T>
std::optional<GeneralSolution<T>> solve_general(const Matrix<T>& a, std::span<const T> b, const Arith<T>& ar = {}) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix<T> aug(m, n + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n) = b[i];
  }
  auto pivots = rref(aug, n, ar);
  for (std::size_t i = pivots.size(); i < m; ++i)
    if (!ar.is_zero(aug(i, n))) return std::nullopt;
  GeneralSolution<T> out{std::vector<T>(n, T(0)), pivots.size() == n};
  for (std::size_t k = 0; k < pivots.size(); ++k) out.x[pivots[k]] = aug(k, n);
  return out;
}

/// A basis of the right null space {z : A z = 0}.
template <class T>
std::vector<std::vector<T>> null_space(const Matrix<T>& a, const Arith<T>& ar = {}) {
  Matrix<T> m = a;
  const std::size_t n = a.cols();
  auto pivots = rref(m, n, ar);
  std::vector<bool> is_pivot(n, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::vector<T>> basis;
  for (std::size_t free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    std::vector<T> z(n, T(0));
    z[free] = T(1);
    for (std::size_t k = 0; k < pivots.size(); ++k) z[pivots[k]] = -m(k, free);
    basis.push_back(std::move(z));
  }
  return basis;
}

template <class T>
std::size_t rank(const Matrix<T>& a, const Arith<T>& ar = {}) {
  Matrix<T> m = a;
  return rref(m, a.cols(), ar).size();
}

}  // namespace absorbd
