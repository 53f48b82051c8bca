#include "absorbd/harness.hpp"
#include "absorbd/solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace absorbd;
using testsupport::q;

TEST_CASE("unconstrained twostate") {
  const auto spec = testsupport::twostate();
  const auto best = solve_constrained({spec, {q(1)}, {}, lp::Goal::maximize});
  CHECK(best.value == 1);
  CHECK(best.policy.order() == 1);
  CHECK(best.policy.selectors[0].choice[0] == 0);
  REQUIRE(best.dual);
  CHECK(best.dual->dual_feasible);
  CHECK(best.dual->complementary_slackness);

  const auto worst = solve_constrained({spec, {q(1)}, {}, lp::Goal::minimize});
  CHECK(worst.value == q(4, 5));
  CHECK(worst.policy.selectors[0].choice[0] == 1);
  CHECK(worst.dual->dual_feasible);
}

TEST_CASE("mass-constrained twostate") {
  const auto spec = testsupport::twostate();
  ProblemSpec p{spec, {q(1)}, {mass_criterion(spec, Relation::equal, q(4, 3))}, lp::Goal::maximize};
  const auto r = solve_constrained(p);
  CHECK(r.value == q(14, 15));
  CHECK(r.policy.order() == 2);
  CHECK(r.order_bound == 1);
  CHECK(r.slacks[0] == 0);
  CHECK(r.dual->complementary_slackness);

  p.constraints[0].level = q(3);
  CHECK_THROWS_AS(solve_constrained(p), Infeasible);
}

TEST_CASE("inequality rows count only when tight") {
  const auto spec = testsupport::twostate();
  // The best policy a1 has mass 1, so mass <= 3/2 is slack.
  ProblemSpec loose{spec, {q(1)}, {mass_criterion(spec, Relation::less_equal, q(3, 2))}, lp::Goal::maximize};
  const auto r = solve_constrained(loose);
  CHECK(r.value == 1);
  CHECK(r.slacks[0] == q(1, 2));
  CHECK(r.order_bound == 0);
  // mass >= 3/2 forces a mixture: the best has mass exactly 3/2.
  ProblemSpec tight{spec, {q(1)}, {mass_criterion(spec, Relation::greater_equal, q(3, 2))}, lp::Goal::maximize};
  const auto t = solve_constrained(tight);
  CHECK(t.order_bound == 1);
  CHECK(t.slacks[0] == 0);
  // m(a1) + m(a2) = 3/2 with m(a1) + m(a2)/2 = 1 -> m(a1) = 1/2, m(a2) = 1: value 1/2 + 2/5 = 9/10
  CHECK(t.value == q(9, 10));
}

TEST_CASE("float solve agrees with exact") {
  const auto spec = testsupport::twostate();
  ProblemSpec p{spec, {q(1)}, {mass_criterion(spec, Relation::equal, q(4, 3))}, lp::Goal::maximize};
  const auto r = solve_constrained_float(p, Arith<double>{});
  CHECK(r.value == doctest::Approx(14.0 / 15));
  CHECK(r.policy.order() == 2);
}

TEST_CASE("unconstrained optimum equals the best deterministic policy") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.d = 2;
    const auto spec = generate(cfg);
    const std::vector<Rational> c{q(1), q(-2)};
    Rational best;
    bool first = true;
    for (const auto& phi : enumerate_deterministic(spec)) {
      const auto perf = testsupport::oracle_performance(spec, testsupport::oracle_occupation(spec, as_stationary(phi, spec)));
      const Rational v = c[0] * perf[0] + c[1] * perf[1];
      if (first || v > best) best = v;
      first = false;
    }
    const auto r = solve_constrained({spec, c, {}, lp::Goal::maximize});
    CHECK(r.value == best);
    CHECK(r.dual->dual_feasible);
    CHECK(r.dual->complementary_slackness);
  }
}

TEST_CASE("image report") {
  const auto spec = testsupport::twostate();
  const auto rep = image_report({spec, {q(1)}, {}, lp::Goal::maximize}, {{q(14, 15)}, {q(1)}, {q(2)}});
  CHECK(rep.image.vertices.size() == 2);
  CHECK(rep.targets[0].relative_interior);
  CHECK(rep.targets[1].member);
  CHECK_FALSE(rep.targets[1].relative_interior);
  CHECK_FALSE(rep.targets[2].member);

  auto zero = spec;
  for (auto& row : zero.rewards[0]) row[0] = 0;
  const auto z = image_report({zero, {q(1)}, {}, lp::Goal::maximize}, {});
  REQUIRE(z.image.vertices.size() == 1);
  CHECK(z.image.vertices[0] == testsupport::qs({q(0)}));
}

TEST_CASE("problem checks") {
  const auto spec = testsupport::twostate();
  CHECK_THROWS_AS(solve_constrained({spec, {q(1), q(1)}, {}, lp::Goal::maximize}), std::invalid_argument);
  CHECK_THROWS_AS(reward_criterion(spec, 3, Relation::equal, q(1)), std::invalid_argument);
}
