#include "absorbd/montecarlo.hpp"
#include "absorbd/occupation.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace absorbd;
using testsupport::q;

TEST_CASE("twostate a2: absorption time near 2") {
  const auto spec = testsupport::twostate();
  const auto r = simulate(spec, MarkovPolicy{{}, as_stationary(testsupport::pick(spec, 1), spec)}, {9, 100000});
  CHECK(std::abs(r.mean_time - 2.0) <= 4 * r.time_se);
  CHECK(r.horizon_cap_hits == 0);
  CHECK(r.occupation[0] == 0);
}

TEST_CASE("twostate uniform: performance near 14/15") {
  const auto spec = testsupport::twostate();
  const auto r = simulate(spec, MarkovPolicy{{}, uniform_policy(spec)}, {5, 100000});
  CHECK(std::abs(r.performance[0] - 14.0 / 15) <= 4 * r.performance_se[0]);
  CHECK(std::abs(r.mean_time - 4.0 / 3) <= 4 * r.time_se);
}

TEST_CASE("same seed, same bits") {
  const auto spec = testsupport::twostate();
  const MarkovPolicy pi{{}, uniform_policy(spec)};
  const auto a = simulate(spec, pi, {77, 2000});
  const auto b = simulate(spec, pi, {77, 2000});
  CHECK(a.time_samples == b.time_samples);
  CHECK(a.performance == b.performance);
  CHECK(a.occupation_se == b.occupation_se);
  const auto c = simulate(spec, pi, {78, 2000});
  CHECK(a.time_samples != c.time_samples);
}

TEST_CASE("eta on delta gives zero estimates") {
  auto spec = testsupport::twostate();
  spec.eta = {q(0), q(1)};
  const auto r = simulate(spec, MarkovPolicy{{}, uniform_policy(spec)}, {1, 500});
  CHECK(r.mean_time == 0);
  CHECK(r.performance[0] == 0);
}

TEST_CASE("horizon cap is reported, not fatal") {
  const auto spec = load_model(testsupport::fixture("selfloop.json"));
  auto stay = first_action_policy(spec);
  stay.choice[0] = 1;
  const auto r = simulate(spec, MarkovPolicy{{}, as_stationary(stay, spec)}, {1, 10, 50});
  CHECK(r.horizon_cap_hits == 10);
  CHECK(r.mean_time == 50);
}

TEST_CASE("history-dependent callback") {
  const auto spec = testsupport::twostate();
  // a2 on the first step, a1 afterwards: the Markov example with mass {1/2, 1}.
  HistoryPolicy h = [](std::span<const StateAction> past, std::size_t, double) -> std::size_t { return past.empty() ? 1 : 0; };
  const auto r = simulate(spec, h, {3, 100000});
  CHECK(std::abs(r.occupation[0] - 0.5) <= 4 * r.occupation_se[0]);
  CHECK(r.occupation[1] == 1.0);
  CHECK(std::abs(r.mean_time - 1.5) <= 4 * r.time_se);
}

TEST_CASE("episodes must be positive") {
  const auto spec = testsupport::twostate();
  CHECK_THROWS_AS(simulate(spec, MarkovPolicy{{}, uniform_policy(spec)}, {1, 0}), std::invalid_argument);
}
