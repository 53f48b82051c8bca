#include "absorbd/geometry.hpp"
#include "absorbd/lp.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace absorbd;
using testsupport::q;

namespace {

lp::StandardLP<Rational> make(std::initializer_list<std::initializer_list<long long>> a, std::initializer_list<long long> b,
                              std::initializer_list<long long> c) {
  lp::StandardLP<Rational> out{Matrix<Rational>(0, c.size()), {}, {}};
  for (const auto& r : a) {
    std::vector<Rational> row;
    for (auto v : r) row.emplace_back(v);
    out.a.append_row(row);
  }
  for (auto v : b) out.b.emplace_back(v);
  for (auto v : c) out.c.emplace_back(v);
  return out;
}

}  // namespace

TEST_CASE("simplex on small programs") {
  // max x + y, x + 2y + s = 4, 3x + y + t = 6  -> optimum at (8/5, 6/5), value 14/5
  auto p = make({{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}, {1, 1, 0, 0});
  auto s = lp::solve(p, lp::Goal::maximize);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.objective == q(14, 5));
  CHECK(s.values[0] == q(8, 5));
  auto m = lp::solve(p, lp::Goal::minimize);
  CHECK(m.objective == 0);
}

TEST_CASE("infeasible, unbounded and redundant rows") {
  CHECK(lp::solve(make({{1, 1}}, {-1}, {1, 0}), lp::Goal::maximize).status == lp::Status::infeasible);
  CHECK(lp::solve(make({{1, -1}}, {0}, {1, 0}), lp::Goal::maximize).status == lp::Status::unbounded);
  auto red = make({{1, 1}, {2, 2}}, {1, 2}, {1, 0});
  auto s = lp::solve(red, lp::Goal::maximize);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.objective == 1);
  CHECK(s.rows.size() == 1);
}

TEST_CASE("degenerate program terminates under Bland's rule") {
  // Beale's cycling example in standard form.
  lp::StandardLP<Rational> p{Matrix<Rational>(3, 7, Rational(0)), {q(0), q(0), q(1)}, {}};
  const Rational rows[3][7] = {{q(1, 4), q(-8), q(-1), q(9), q(1), q(0), q(0)},
                               {q(1, 2), q(-12), q(-1, 2), q(3), q(0), q(1), q(0)},
                               {q(0), q(0), q(1), q(0), q(0), q(0), q(1)}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 7; ++j) p.a(i, j) = rows[i][j];
  p.c = {q(3, 4), q(-20), q(1, 2), q(-6), q(0), q(0), q(0)};
  auto s = lp::solve(p, lp::Goal::maximize);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.objective == q(5, 4));
}

TEST_CASE("duals satisfy y A_B = c_B") {
  auto p = make({{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}, {1, 1, 0, 0});
  auto s = lp::solve(p, lp::Goal::maximize);
  for (std::size_t k = 0; k < s.basis.size(); ++k) {
    Rational v = 0;
    for (std::size_t i = 0; i < p.n_rows(); ++i) v += s.duals[i] * p.a(i, s.basis[k]);
    CHECK(v == p.c[s.basis[k]]);
  }
}

TEST_CASE("vertex enumeration") {
  // unit square with slacks: 4 vertices
  auto sq = make({{1, 0, 1, 0}, {0, 1, 0, 1}}, {1, 1}, {0, 0, 0, 0});
  CHECK(lp::enumerate_vertices(sq).size() == 4);
  CHECK_THROWS_AS(lp::enumerate_vertices(sq, 3), lp::TooLarge);
  CHECK_THROWS_AS(lp::enumerate_vertices(make({{1, -1}}, {0}, {0, 0})), lp::Unbounded);
  CHECK(lp::enumerate_vertices(make({{1, 1}}, {-1}, {0, 0})).empty());
}

TEST_CASE("characteristic LP of twostate") {
  const auto spec = testsupport::twostate();
  const auto poly = build_polytope(spec);
  CHECK(poly.lp.n_vars() == 2);
  CHECK(poly.lp.n_rows() == 1);
  auto p = poly.lp;
  p.c = {q(1), q(2, 5)};
  const auto best = lp::solve(p, lp::Goal::maximize);
  CHECK(best.objective == 1);
  CHECK(best.values == testsupport::qs({q(1), q(0)}));
  CHECK(lp::max_total_mass(poly.lp) == 2);
  std::set<std::vector<Rational>> verts;
  for (const auto& v : lp::enumerate_vertices(poly.lp)) verts.insert(v.values);
  CHECK(verts == std::set<std::vector<Rational>>{{q(1), q(0)}, {q(0), q(2)}});
}

TEST_CASE("floating simplex agrees with exact") {
  auto p = make({{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}, {1, 1, 0, 0});
  auto f = lp::solve(convert_lp<double>(p), lp::Goal::maximize);
  REQUIRE(f.status == lp::Status::optimal);
  CHECK(f.objective == doctest::Approx(2.8));
}
