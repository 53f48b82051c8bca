#pragma once

// Dense two-phase primal simplex over an exact or floating scalar, with
// Bland's rule throughout, plus exhaustive basis enumeration for small
// polytopes. Problems are in standard form: A x = b, x >= 0.

#include "absorbd/linalg.hpp"
#include "absorbd/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace absorbd::lp {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class Unbounded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default variable cap for vertex enumeration.
inline constexpr std::size_t kDefaultVertexCap = 24;

template <class T>
struct StandardLP {
  Matrix<T> a;
  std::vector<T> b;
  std::vector<T> c;

  std::size_t n_vars() const { return a.cols(); }
  std::size_t n_rows() const { return a.rows(); }
};

enum class Status { optimal, unbounded, infeasible };
enum class Goal { maximize, minimize };

template <class T>
struct BasicSolution {
  Status status = Status::infeasible;
  std::vector<T> values;
  /// Basic columns, one per row kept after dropping redundant equalities.
  std::vector<std::size_t> basis;
  /// Rows of A that survive redundancy elimination, aligned with basis.
  std::vector<std::size_t> rows;
  T objective = T(0);
  /// Dual prices y with y A_B = c_B on kept rows (zero on dropped rows). Set for optimal solves.
  std::vector<T> duals;
};

namespace detail {

template <class T>
class Tableau {
 public:
  Tableau(const StandardLP<T>& lp, const Arith<T>& ar) : ar_(ar), m_(lp.n_rows()), n_(lp.n_vars()) {
    // Columns: original n, artificial m, rhs.
    t_ = Matrix<T>(m_, n_ + m_ + 1, T(0));
    for (std::size_t i = 0; i < m_; ++i) {
      const bool flip = ar_.negative(lp.b[i]);
      for (std::size_t j = 0; j < n_; ++j) t_(i, j) = flip ? T(-lp.a(i, j)) : lp.a(i, j);
      t_(i, n_ + i) = T(1);
      t_(i, rhs()) = flip ? T(-lp.b[i]) : lp.b[i];
      basis_.push_back(n_ + i);
      rows_.push_back(i);
    }
  }

  /// Phase 1. False when the equalities have no nonnegative solution.
  bool find_feasible() {
    std::vector<T> cost(n_ + m_, T(0));
    for (std::size_t k = 0; k < m_; ++k) cost[n_ + k] = T(-1);
    iterate(cost, n_ + m_);
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] >= n_ && ar_.positive(t_(i, rhs()))) return false;
    // Pivot remaining (zero-level) artificials out; rows with no original
    // column left are redundant and are dropped.
    for (std::size_t i = 0; i < basis_.size();) {
      if (basis_[i] < n_) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < n_ && !col; ++j)
        if (!ar_.is_zero(t_(i, j))) col = j;
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        drop_row(i);
      }
    }
    return true;
  }

  /// Phase 2 on original columns; cost is maximized. False when unbounded.
  bool optimize(const std::vector<T>& cost) { return iterate(cost, n_); }

  std::vector<T> values() const {
    std::vector<T> x(n_, T(0));
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      T v = t_(i, rhs());
      if constexpr (!Arith<T>::exact)
        if (ar_.is_zero(v)) v = T(0);
      x[basis_[i]] = v;
    }
    return x;
  }

  const std::vector<std::size_t>& basis() const { return basis_; }
  const std::vector<std::size_t>& rows() const { return rows_; }

 private:
  std::size_t rhs() const { return n_ + m_; }

  void pivot(std::size_t r, std::size_t c) {
    T inv = T(1) / t_(r, c);
    if constexpr (std::is_same_v<T, double>)
      simd::scale(inv, t_.row(r));
    else
      for (auto& v : t_.row(r)) v *= inv;
    t_(r, c) = T(1);
    for (std::size_t i = 0; i < t_.rows(); ++i) {
      if (i == r || ar_.is_zero(t_(i, c))) continue;
      T f = -t_(i, c);
      absorbd::detail::add_scaled_row<T>(t_.row(i), t_.row(r), f);
      t_(i, c) = T(0);
    }
    basis_[r] = c;
  }

  void drop_row(std::size_t i) {
    Matrix<T> next(0, t_.cols());
    for (std::size_t k = 0; k < t_.rows(); ++k)
      if (k != i) next.append_row(t_.row(k));
    if (next.rows() == 0) next = Matrix<T>(0, t_.cols());
    t_ = std::move(next);
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  /// Bland's rule: smallest improving column enters; among tied ratios the
  /// smallest basic column leaves.
  bool iterate(const std::vector<T>& cost, std::size_t ncols) {
    std::vector<bool> in_basis(n_ + m_, false);
    for (;;) {
      std::fill(in_basis.begin(), in_basis.end(), false);
      for (auto bcol : basis_) in_basis[bcol] = true;
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < ncols && !enter; ++j) {
        if (in_basis[j]) continue;
        T d = cost[j];
        for (std::size_t i = 0; i < basis_.size(); ++i)
          if (!ar_.is_zero(t_(i, j))) d -= cost[basis_[i]] * t_(i, j);
        if (ar_.positive(d)) enter = j;
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      T best(0);
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (!ar_.positive(t_(i, *enter))) continue;
        T ratio = t_(i, rhs()) / t_(i, *enter);
        const bool tie = leave && ar_.equal(ratio, best);
        if (!leave || (!tie && ratio < best) || (tie && basis_[i] < basis_[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

  Arith<T> ar_;
  std::size_t m_, n_;
  Matrix<T> t_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> rows_;
};

template <class T>
void check_dims(const StandardLP<T>& lp) {
  if (lp.b.size() != lp.n_rows() || lp.c.size() != lp.n_vars())
    throw DimensionMismatch("LP dimensions: A is " + std::to_string(lp.n_rows()) + "x" + std::to_string(lp.n_vars()) +
                            ", b has " + std::to_string(lp.b.size()) + ", c has " + std::to_string(lp.c.size()));
}

template <class T>
T dot(const std::vector<T>& u, const std::vector<T>& v) {
  T s(0);
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

}  // namespace detail

/// Dual prices for a basis: y with y A[rows, basis] = c[basis].
template <class T>
std::vector<T> basis_duals(const StandardLP<T>& lp, const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& basis, const Arith<T>& ar = {}) {
  std::vector<T> y(lp.n_rows(), T(0));
  if (basis.empty()) return y;
  const std::size_t k = basis.size();
  Matrix<T> ab(k, k);
  std::vector<T> cb(k);
  for (std::size_t i = 0; i < k; ++i) {
    cb[i] = lp.c[basis[i]];
    for (std::size_t j = 0; j < k; ++j) ab(i, j) = lp.a(rows[i], basis[j]);
  }
  auto sol = solve_left(ab, std::span<const T>(cb), ar);
  if (!sol) return y;
  for (std::size_t i = 0; i < k; ++i) y[rows[i]] = (*sol)[i];
  return y;
}

/// Optimal basic feasible solution, or infeasible/unbounded status.
template <class T>
BasicSolution<T> solve(const StandardLP<T>& lp, Goal goal, const Arith<T>& ar = {}) {
  detail::check_dims(lp);
  detail::Tableau<T> tab(lp, ar);
  BasicSolution<T> out;
  if (!tab.find_feasible()) {
    out.status = Status::infeasible;
    return out;
  }
  std::vector<T> cost(lp.n_vars() + lp.n_rows(), T(0));
  for (std::size_t j = 0; j < lp.n_vars(); ++j) cost[j] = goal == Goal::maximize ? lp.c[j] : T(-lp.c[j]);
  const bool bounded = tab.optimize(cost);
  out.values = tab.values();
  out.basis = tab.basis();
  out.rows = tab.rows();
  out.objective = detail::dot(lp.c, out.values);
  out.status = bounded ? Status::optimal : Status::unbounded;
  if (bounded) out.duals = basis_duals(lp, out.rows, out.basis, ar);
  return out;
}

/// Any basic feasible solution (phase 1 only), or empty.
template <class T>
std::optional<BasicSolution<T>> feasible_point(const StandardLP<T>& lp, const Arith<T>& ar = {}) {
  StandardLP<T> zero = lp;
  zero.c.assign(lp.n_vars(), T(0));
  auto s = solve(zero, Goal::maximize, ar);
  if (s.status != Status::optimal) return std::nullopt;
  s.objective = detail::dot(lp.c, s.values);
  return s;
}

/// sup of the sum of all variables. Throws Unbounded or Infeasible.
template <class T>
T max_total_mass(const StandardLP<T>& lp, const Arith<T>& ar = {}) {
  StandardLP<T> ones = lp;
  ones.c.assign(lp.n_vars(), T(1));
  auto s = solve(ones, Goal::maximize, ar);
  if (s.status == Status::unbounded) throw Unbounded("total mass is unbounded over the polytope");
  if (s.status == Status::infeasible) throw Infeasible("polytope is empty");
  return s.objective;
}

/// All distinct vertices of {A x = b, x >= 0}, by enumeration of bases.
template <class T>
std::vector<BasicSolution<T>> enumerate_vertices(const StandardLP<T>& lp, std::size_t cap = kDefaultVertexCap,
                                                 const Arith<T>& ar = {}) {
  detail::check_dims(lp);
  const std::size_t n = lp.n_vars();
  if (n > cap) throw TooLarge("vertex enumeration over " + std::to_string(n) + " variables exceeds cap " + std::to_string(cap));
  {
    StandardLP<T> ones = lp;
    ones.c.assign(n, T(1));
    auto s = solve(ones, Goal::maximize, ar);
    if (s.status == Status::infeasible) return {};
    if (s.status == Status::unbounded) throw Unbounded("polytope is unbounded; vertex enumeration needs a bounded set");
  }

  // Independent rows of [A | b].
  Matrix<T> aug(lp.n_rows(), n + 1);
  for (std::size_t i = 0; i < lp.n_rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = lp.a(i, j);
    aug(i, n) = lp.b[i];
  }
  const auto pivots = rref(aug, n, ar);
  const std::size_t r = pivots.size();
  std::vector<T> rhs(r);
  for (std::size_t i = 0; i < r; ++i) rhs[i] = aug(i, n);

  std::vector<BasicSolution<T>> out;
  std::set<std::vector<T>> seen_exact;
  auto record = [&](std::vector<T> x, std::vector<std::size_t> basis) {
    if constexpr (Arith<T>::exact) {
      if (!seen_exact.insert(x).second) return;
    } else {
      for (const auto& v : out) {
        bool same = true;
        for (std::size_t j = 0; j < n && same; ++j) same = ar.equal(v.values[j], x[j]);
        if (same) return;
      }
    }
    BasicSolution<T> s;
    s.status = Status::optimal;
    s.objective = detail::dot(lp.c, x);
    s.values = std::move(x);
    s.basis = std::move(basis);
    out.push_back(std::move(s));
  };

  if (r == 0) {
    record(std::vector<T>(n, T(0)), {});
    return out;
  }
  std::vector<std::size_t> comb(r);
  for (std::size_t i = 0; i < r; ++i) comb[i] = i;
  Matrix<T> bm(r, r);
  while (true) {
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) bm(i, j) = aug(i, comb[j]);
    if (auto xb = solve_square(bm, std::span<const T>(rhs), ar)) {
      bool nonneg = std::none_of(xb->begin(), xb->end(), [&](const T& v) { return ar.negative(v); });
      if (nonneg) {
        std::vector<T> x(n, T(0));
        for (std::size_t j = 0; j < r; ++j) x[comb[j]] = ar.is_zero((*xb)[j]) ? T(0) : (*xb)[j];
        record(std::move(x), comb);
      }
    }
    // Next combination in lexicographic order.
    std::size_t k = r;
    while (k > 0 && comb[k - 1] == n - r + k - 1) --k;
    if (k == 0) break;
    ++comb[k - 1];
    for (std::size_t j = k; j < r; ++j) comb[j] = comb[j - 1] + 1;
  }
  return out;
}

}  // namespace absorbd::lp
