#include "absorbd/harness.hpp"
#include "absorbd/occupation.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace absorbd;
using testsupport::q;

TEST_CASE("twostate occupation measures") {
  const auto spec = testsupport::twostate();
  // m = 1 / (1 - B): B = 0, 1/2, 1/4 for a1, a2, uniform.
  const auto m1 = occupation_of_stationary<Rational>(spec, testsupport::pick(spec, 0));
  const auto m2 = occupation_of_stationary<Rational>(spec, testsupport::pick(spec, 1));
  const auto mu = occupation_of_stationary<Rational>(spec, uniform_policy(spec));
  CHECK(m1.mass == testsupport::qs({q(1), q(0)}));
  CHECK(m2.mass == testsupport::qs({q(0), q(2)}));
  CHECK(mu.mass == testsupport::qs({q(2, 3), q(2, 3)}));
  CHECK(mu.total() == q(4, 3));
  CHECK(performance(spec, m1) == testsupport::qs({q(1)}));
  CHECK(performance(spec, m2) == testsupport::qs({q(4, 5)}));
  CHECK(performance(spec, mu) == testsupport::qs({q(14, 15)}));
}

TEST_CASE("eventually stationary Markov policies") {
  const auto spec = testsupport::twostate();
  const auto a1 = as_stationary(testsupport::pick(spec, 0), spec);
  const auto a2 = as_stationary(testsupport::pick(spec, 1), spec);
  // a2 once: mass 1 on (s0,a2), survival 1/2 then a1 adds 1/2 on (s0,a1).
  CHECK(occupation_of_markov<Rational>(spec, MarkovPolicy{{a2}, a1}).mass == testsupport::qs({q(1, 2), q(1)}));
  CHECK(occupation_of_markov<Rational>(spec, MarkovPolicy{{a1}, a2}).mass == testsupport::qs({q(1), q(0)}));
  CHECK(state_distribution<Rational>(spec, MarkovPolicy{{a2}, a1}, 1) == testsupport::qs({q(1, 2)}));
}

TEST_CASE("disintegration and characteristic residual") {
  const auto spec = testsupport::twostate();
  const auto mu = occupation_of_stationary<Rational>(spec, uniform_policy(spec));
  CHECK(disintegrate(spec, mu).dist[0] == testsupport::qs({q(1, 2), q(1, 2)}));
  for (const auto& r : characteristic_residual(spec, mu)) CHECK(r == 0);
  auto off = mu;
  off.mass[0] += 1;
  CHECK(characteristic_residual(spec, off)[0] != 0);
}

TEST_CASE("floating mode tracks exact mode") {
  const auto spec = testsupport::twostate();
  const auto muf = occupation_of_stationary<double>(spec, uniform_policy(spec));
  CHECK(muf.mass[0] == doctest::Approx(2.0 / 3));
  CHECK(performance(spec, muf)[0] == doctest::Approx(14.0 / 15));
  const auto sigma = disintegrate(spec, muf, Arith<double>{});
  CHECK(sigma.dist[0][0] + sigma.dist[0][1] == 1);
}

TEST_CASE("stationary measures match the independent oracle on generated models") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.max_states = 5;
    cfg.d = 2;
    const auto spec = generate(cfg);
    Rng rng(seed);
    const auto sigma = random_stationary(spec, rng);
    const auto mu = occupation_of_stationary<Rational>(spec, sigma);
    CHECK(mu.mass == testsupport::oracle_occupation(spec, sigma));
    CHECK(performance(spec, mu) == testsupport::oracle_performance(spec, mu.mass));
  }
}

TEST_CASE("non-absorbing models are refused") {
  const auto spec = load_model(testsupport::fixture("selfloop.json"));
  CHECK_THROWS_AS(occupation_of_stationary<Rational>(spec, uniform_policy(spec)), NotAbsorbing);
}

TEST_CASE("eta on delta gives the zero measure") {
  auto spec = testsupport::twostate();
  spec.eta = {q(0), q(1)};
  const auto mu = occupation_of_stationary<Rational>(spec, uniform_policy(spec));
  CHECK(mu.total() == 0);
}
