#include "absorbd/harness.hpp"
#include "absorbd/occupation.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace absorbd;
using testsupport::q;

TEST_CASE("generated models are valid, absorbing and seed-stable") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.d = 2;
    cfg.delta_size = 1 + seed % 2;
    const auto a = generate(cfg);
    CHECK(validate(a).ok);
    CHECK(check_uniform_absorption(a).uniformly_absorbing);
    const auto b = generate(cfg);
    CHECK(model_to_json(a) == model_to_json(b));
  }
}

TEST_CASE("escape floor one absorbs in a single step") {
  GenConfig cfg;
  cfg.seed = 4;
  cfg.escape_floor = 1;
  const auto spec = generate(cfg);
  Rng rng(4);
  const auto mu = occupation_of_stationary<Rational>(spec, random_stationary(spec, rng));
  const auto marg = mu.marginal(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (!spec.is_delta(x)) CHECK(marg[x] == spec.eta[x]);
}

TEST_CASE("config checks") {
  GenConfig cfg;
  cfg.min_states = 3;
  cfg.max_states = 2;
  CHECK_THROWS_AS(check_config(cfg), std::invalid_argument);
  cfg = GenConfig{};
  cfg.escape_floor = 0;
  CHECK_THROWS_AS(check_config(cfg), std::invalid_argument);
}

TEST_CASE("run_verification on small instances") {
  GenConfig cfg;
  cfg.seed = 5;
  const auto rep = run_verification(cfg, 20);
  CHECK(rep.ok());
  CHECK(rep.suites.size() == suite_names().size());
  for (const auto& s : rep.suites) CHECK(s.passed + s.skipped == 20);
  CHECK(run_verification(cfg, 0).suites.empty());
  CHECK_THROWS_AS(run_verification(cfg, 1, {"nonsense"}), std::invalid_argument);
}

TEST_CASE("cap-exceeding instances skip enumeration suites") {
  GenConfig cfg;
  cfg.seed = 2;
  const auto rep = run_verification(cfg, 5, {"extreme_points", "characteristic"}, 1);
  CHECK(rep.suites[0].skipped == 5);
  CHECK(rep.suites[1].passed == 5);
  CHECK(rep.ok());
}

TEST_CASE("suite filtering leaves other suites' draws unchanged") {
  GenConfig cfg;
  cfg.seed = 8;
  const auto all = report_to_json(run_verification(cfg, 6));
  const auto one = report_to_json(run_verification(cfg, 6, {"dubins"}));
  CHECK(one["suites"][0] == all["suites"][2]);
}

TEST_CASE("atomless demonstration on twostate") {
  const auto spec = testsupport::twostate();
  const auto demo = atomless_demo(spec, {q(14, 15)});
  CHECK(demo.achievable);
  CHECK_FALSE(demo.achieved_deterministically);
  REQUIRE(demo.deterministic_values.size() == 2);
  REQUIRE(demo.witness);
  CHECK(demo.witness->policy.order() == 2);
}
