#include "absorbd/harness.hpp"

#include "absorbd/errors.hpp"
#include "absorbd/geometry.hpp"
#include "absorbd/lp.hpp"
#include "absorbd/occupation.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace absorbd {

using nlohmann::json;

void check_config(const GenConfig& cfg) {
  if (cfg.min_states == 0 || cfg.min_states > cfg.max_states) throw std::invalid_argument("state count range is empty");
  if (cfg.min_actions == 0 || cfg.min_actions > cfg.max_actions) throw std::invalid_argument("action count range is empty");
  if (cfg.d == 0) throw std::invalid_argument("d must be at least 1");
  if (cfg.delta_size == 0) throw std::invalid_argument("delta needs at least one state");
  if (cfg.escape_floor.sign() <= 0 || cfg.escape_floor > 1) throw std::invalid_argument("escape floor must lie in (0, 1]");
  if (cfg.denominator < 1) throw std::invalid_argument("denominator must be positive");
  if (cfg.reward_bound < 0) throw std::invalid_argument("reward bound must be nonnegative");
}

namespace {

// Random nonnegative integer weights (at least one positive) scaled to `total`.
std::vector<Rational> random_split(Rng& rng, std::size_t k, long long spread, const Rational& total) {
  std::vector<long long> w(k);
  long long sum = 0;
  for (auto& v : w) sum += v = rng.between(0, spread);
  if (sum == 0) {
    w[rng.below(k)] = 1;
    sum = 1;
  }
  std::vector<Rational> out;
  for (auto v : w) out.push_back(total * Rational(v, sum));
  return out;
}

ModelSpec generate_once(const GenConfig& cfg, Rng& rng) {
  const std::size_t nt = rng.between(static_cast<long long>(cfg.min_states), static_cast<long long>(cfg.max_states));
  const std::size_t nd = cfg.delta_size;
  const std::size_t n = nt + nd;
  ModelSpec spec;
  spec.d = cfg.d;
  for (std::size_t x = 0; x < nt; ++x) spec.states.push_back("s" + std::to_string(x));
  for (std::size_t x = 0; x < nd; ++x) spec.states.push_back("t" + std::to_string(x));
  spec.in_delta.assign(n, false);
  for (std::size_t x = nt; x < n; ++x) spec.in_delta[x] = true;
  spec.actions.resize(n);
  spec.kernel.resize(n);
  spec.rewards.resize(n);

  const long long den = cfg.denominator;
  for (std::size_t x = 0; x < n; ++x) {
    if (spec.in_delta[x]) {
      spec.actions[x] = {"a_delta"};
      spec.kernel[x].assign(1, std::vector<Rational>(n, Rational(0)));
      spec.kernel[x][0][x] = 1;
      spec.rewards[x].assign(1, std::vector<Rational>(cfg.d, Rational(0)));
      continue;
    }
    const std::size_t na = rng.between(static_cast<long long>(cfg.min_actions), static_cast<long long>(cfg.max_actions));
    for (std::size_t a = 0; a < na; ++a) {
      spec.actions[x].push_back("a" + std::to_string(a));
      const Rational escape = cfg.escape_floor + (Rational(1) - cfg.escape_floor) * Rational(rng.between(0, den), den);
      std::vector<Rational> row(n, Rational(0));
      const auto to_delta = random_split(rng, nd, 3, escape);
      const auto to_trans = random_split(rng, nt, 3, Rational(1) - escape);
      for (std::size_t y = 0; y < nt; ++y) row[y] = to_trans[y];
      for (std::size_t y = 0; y < nd; ++y) row[nt + y] = to_delta[y];
      spec.kernel[x].push_back(std::move(row));
      std::vector<Rational> r;
      for (std::size_t i = 0; i < cfg.d; ++i) r.emplace_back(rng.between(-cfg.reward_bound * den, cfg.reward_bound * den), den);
      spec.rewards[x].push_back(std::move(r));
    }
  }

  std::vector<long long> w(n, 0);
  long long sum = 0;
  for (std::size_t x = 0; x < n; ++x) {
    w[x] = x < nt ? rng.between(0, 3) : (rng.below(4) == 0 ? 1 : 0);
    sum += w[x];
  }
  if (sum == 0) {
    w[0] = 1;
    sum = 1;
  }
  for (std::size_t x = 0; x < n; ++x) spec.eta.emplace_back(w[x], sum);
  return spec;
}

Rational dot(const std::vector<Rational>& u, const std::vector<Rational>& v) {
  Rational s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

std::string vec_str(const std::vector<Rational>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + to_string(v[i]);
  return s + "]";
}

}  // namespace

ModelSpec generate(const GenConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  for (;;) {
    auto spec = generate_once(cfg, rng);
    if (validate(spec).ok && check_uniform_absorption(spec).uniformly_absorbing) return spec;
  }
}

StationaryPolicy random_stationary(const ModelSpec& spec, Rng& rng, std::size_t max_support) {
  StationaryPolicy sigma;
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    const std::size_t na = spec.actions[x].size();
    const std::size_t cap = max_support == 0 ? na : std::min(na, max_support);
    const std::size_t k = 1 + rng.below(cap);
    std::vector<std::size_t> idx(na);
    for (std::size_t a = 0; a < na; ++a) idx[a] = a;
    // Partial Fisher-Yates picks the support.
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(na - i)]);
    std::vector<Rational> row(na, Rational(0));
    long long sum = 0;
    std::vector<long long> w(k);
    for (auto& v : w) sum += v = rng.between(1, 5);
    for (std::size_t i = 0; i < k; ++i) row[idx[i]] = Rational(w[i], sum);
    sigma.dist.push_back(std::move(row));
  }
  return sigma;
}

ChatteringStationaryPolicy random_chattering(const ModelSpec& spec, Rng& rng, std::size_t order) {
  ChatteringStationaryPolicy g;
  for (std::size_t i = 0; i < order; ++i) {
    DeterministicStationaryPolicy phi;
    for (std::size_t x = 0; x < spec.num_states(); ++x) phi.choice.push_back(rng.below(spec.actions[x].size()));
    g.selectors.push_back(std::move(phi));
  }
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    std::vector<long long> w(order);
    long long sum = 0;
    for (auto& v : w) sum += v = rng.between(0, 4);
    if (sum == 0) {
      w[0] = 1;
      sum = 1;
    }
    std::vector<Rational> row;
    for (auto v : w) row.emplace_back(v, sum);
    g.weights.push_back(std::move(row));
  }
  return g;
}

MarkovPolicy random_markov(const ModelSpec& spec, Rng& rng, std::size_t horizon) {
  MarkovPolicy pi;
  for (std::size_t t = 0; t < horizon; ++t) pi.stages.push_back(random_stationary(spec, rng));
  pi.tail = random_stationary(spec, rng);
  return pi;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"extreme_points", "characteristic",      "dubins",     "sufficiency",
                                              "stage_reduction", "support_restriction", "injectivity"};
  return names;
}

namespace {

SuiteOutcome fail(std::string why) { return {Outcome::fail, std::move(why)}; }

SuiteOutcome suite_extreme_points(const ModelSpec& spec, std::size_t cap) {
  const auto ext = extreme_occupations(spec, cap);
  const auto poly = build_polytope(spec);
  for (const auto& e : ext)
    if (!is_extreme_point(poly.lp, e.measure.mass)) return fail("vertex " + vec_str(e.measure.mass) + " fails the midpoint test");
  return {Outcome::pass, std::to_string(ext.size()) + " vertices"};
}

SuiteOutcome suite_characteristic(const ModelSpec& spec, Rng& rng) {
  const auto s1 = random_stationary(spec, rng);
  const auto s2 = random_stationary(spec, rng);
  const auto m1 = occupation_of_stationary<Rational>(spec, s1);
  const auto m2 = occupation_of_stationary<Rational>(spec, s2);
  for (const auto& v : characteristic_residual(spec, m1))
    if (!v.is_zero()) return fail("occupation measure violates the characteristic equations");
  // Any convex combination is again an occupation measure, of its own disintegration.
  const Rational lambda(1 + static_cast<long long>(rng.below(5)), 6);
  ExactMeasure mix = m1;
  for (std::size_t k = 0; k < mix.mass.size(); ++k) mix.mass[k] = lambda * m1.mass[k] + (1 - lambda) * m2.mass[k];
  const auto back = occupation_of_stationary<Rational>(spec, disintegrate(spec, mix), AbsorptionCheck::trusted);
  if (!same_measure(back, mix)) return fail("mixture " + vec_str(mix.mass) + " is not the occupation measure of its disintegration");
  return {};
}

SuiteOutcome suite_dubins(const ModelSpec& spec, Rng& rng, std::size_t cap) {
  const std::size_t p = 1 + rng.below(2);
  PairTable g(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
      std::vector<Rational> row;
      for (std::size_t i = 0; i < p; ++i) row.emplace_back(spec.is_delta(x) ? 0 : rng.between(-2, 2));
      g[x].push_back(std::move(row));
    }
  const auto sigma = random_stationary(spec, rng);
  const auto alpha = integrate(occupation_of_stationary<Rational>(spec, sigma), g, p);
  const auto poly = build_polytope(spec, {{g, alpha}});
  const auto vertices = lp::enumerate_vertices(poly.lp, cap);
  if (vertices.empty()) return fail("feasible constrained polytope has no vertex");
  for (const auto& v : vertices) {
    const auto mix = decompose_vertex(spec, v.values, p + 1);
    if (mix.components.size() > p + 1) return fail("decomposition uses " + std::to_string(mix.components.size()) + " points");
    std::vector<Rational> sum(v.values.size(), Rational(0));
    Rational total = 0;
    for (const auto& c : mix.components) {
      total += c.weight;
      const auto mu = occupation_of_stationary<Rational>(spec, c.policy, AbsorptionCheck::trusted);
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += c.weight * mu.mass[k];
    }
    if (total != 1 || sum != v.values) return fail("decomposition does not reproduce vertex " + vec_str(v.values));
    const auto gamma = vertex_to_chattering(spec, v.values, p);
    if (gamma.order() > p + 1) return fail("chattering order " + std::to_string(gamma.order()) + " exceeds p + 1");
    const auto mu = occupation_of_stationary<Rational>(spec, as_stationary(gamma, spec), AbsorptionCheck::trusted);
    if (mu.mass != v.values) return fail("chattering policy misses vertex " + vec_str(v.values));
  }
  return {Outcome::pass, "p=" + std::to_string(p) + ", " + std::to_string(vertices.size()) + " vertices"};
}

SuiteOutcome suite_sufficiency(const ModelSpec& spec, Rng& rng) {
  MarkovPolicy pi;
  const auto kind = rng.below(3);
  if (kind == 0)
    pi.tail = random_stationary(spec, rng);
  else if (kind == 1)
    pi.tail = as_stationary(random_chattering(spec, rng, 1 + rng.below(4)), spec);
  else
    pi = random_markov(spec, rng, 1 + rng.below(3));
  const auto target = performance(spec, occupation_of_markov<Rational>(spec, pi));
  const auto m = match_performance(spec, target);
  if (m.policy.order() > spec.d + 1) return fail("matched order " + std::to_string(m.policy.order()) + " exceeds d + 1");
  const auto got = performance(spec, occupation_of_stationary<Rational>(spec, as_stationary(m.policy, spec), AbsorptionCheck::trusted));
  if (got != target) return fail("matched performance " + vec_str(got) + " differs from target " + vec_str(target));
  static const char* kinds[] = {"stationary", "chattering", "markov"};
  return {Outcome::pass, kinds[kind]};
}

SuiteOutcome suite_stage_reduction(const ModelSpec& spec, Rng& rng) {
  const auto pi = random_markov(spec, rng, 1 + rng.below(3));
  const std::size_t t = rng.below(pi.horizon());
  const auto red = stage_reduce(spec, pi, t);
  const std::size_t cap = 2 * spec.d + 1;
  std::size_t widest = 0;
  for (std::size_t x = 0; x < spec.num_states(); ++x) widest = std::max(widest, support_size(red.policy.stages[t], x));
  if (widest > cap) return fail("reduced stage keeps " + std::to_string(widest) + " actions at one state");
  const auto before = performance(spec, occupation_of_markov<Rational>(spec, pi));
  const auto after = performance(spec, occupation_of_markov<Rational>(spec, red.policy));
  if (before != after) return fail("total performance moved from " + vec_str(before) + " to " + vec_str(after));
  if (!red.split_preserved)
    return fail("stage " + std::to_string(t) + " (r+, r-) moved from " + vec_str(red.split_reward_before) + " to " +
                vec_str(red.split_reward_after));
  const auto all = performance(spec, occupation_of_markov<Rational>(spec, reduce_all_stages(spec, pi)));
  if (all != before) return fail("reducing every stage moved performance to " + vec_str(all));
  return {};
}

SuiteOutcome suite_support_restriction(const ModelSpec& spec, Rng& rng, std::size_t cap) {
  if (spec.d > 2) return {Outcome::skip, "d > 2"};
  const auto sigma = random_stationary(spec, rng);
  const auto beta = performance(spec, occupation_of_stationary<Rational>(spec, sigma));
  const auto star = restrict_to_support(spec, sigma);
  const auto image = image_polytope(star, build_polytope(star), cap);
  if (!relative_interior_contains(image, beta)) return fail(vec_str(beta) + " is not in the relative interior of the restricted image");
  for (int k = 0; k < 4; ++k) {
    std::vector<Rational> c;
    for (std::size_t i = 0; i < spec.d; ++i) c.emplace_back(rng.between(-3, 3));
    Rational best = dot(c, image.vertices.front());
    for (const auto& v : image.vertices) best = std::max(best, dot(c, v));
    if (dot(c, beta) != best) continue;
    for (const auto& v : image.vertices)
      if (dot(c, v) != best) return fail("functional " + vec_str(c) + " peaks at " + vec_str(beta) + " but is not constant on the image");
  }
  return {};
}

SuiteOutcome suite_injectivity(const ModelSpec& spec, Rng& rng) {
  const auto s1 = random_stationary(spec, rng);
  const auto m1 = occupation_of_stationary<Rational>(spec, s1);
  const auto mx = m1.marginal(spec.num_states());
  std::vector<std::size_t> candidates;
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (!spec.is_delta(x) && mx[x].sign() > 0 && spec.actions[x].size() > 1) candidates.push_back(x);
  if (candidates.empty()) return {Outcome::skip, "no visited state with a choice"};
  const std::size_t x = candidates[rng.below(candidates.size())];
  auto s2 = s1;
  do {
    s2.dist[x] = random_stationary(spec, rng).dist[x];
  } while (s2.dist[x] == s1.dist[x]);
  const auto m2 = occupation_of_stationary<Rational>(spec, s2);
  if (same_measure(m1, m2)) return fail("policies differing at visited state " + spec.states[x] + " share an occupation measure");
  return {};
}

}  // namespace

SuiteOutcome run_suite(const std::string& name, const ModelSpec& spec, Rng& rng, std::size_t cap) {
  try {
    if (name == "extreme_points") return suite_extreme_points(spec, cap);
    if (name == "characteristic") return suite_characteristic(spec, rng);
    if (name == "dubins") return suite_dubins(spec, rng, cap);
    if (name == "sufficiency") return suite_sufficiency(spec, rng);
    if (name == "stage_reduction") return suite_stage_reduction(spec, rng);
    if (name == "support_restriction") return suite_support_restriction(spec, rng, cap);
    if (name == "injectivity") return suite_injectivity(spec, rng);
  } catch (const lp::TooLarge& e) {
    return {Outcome::skip, e.what()};
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  throw std::invalid_argument("unknown suite '" + name + "'");
}

VerificationReport run_verification(const GenConfig& cfg, std::size_t trials, const std::vector<std::string>& suites,
                                   std::size_t cap) {
  check_config(cfg);
  const auto& all = suite_names();
  for (const auto& s : suites)
    if (std::find(all.begin(), all.end(), s) == all.end()) throw std::invalid_argument("unknown suite '" + s + "'");
  VerificationReport rep;
  rep.trials = trials;
  if (trials == 0) return rep;
  for (const auto& s : all)
    if (suites.empty() || std::find(suites.begin(), suites.end(), s) != suites.end()) rep.suites.push_back({s});

  for (std::size_t i = 0; i < trials; ++i) {
    GenConfig c = cfg;
    c.seed = substream_seed(cfg.seed, i);
    const auto spec = generate(c);
    for (auto& tally : rep.suites) {
      // Each suite gets its own stream so filtering suites leaves the others unchanged.
      const auto si = static_cast<std::uint64_t>(std::find(all.begin(), all.end(), tally.name) - all.begin());
      Rng rng(substream_seed(c.seed, si + 1));
      const auto out = run_suite(tally.name, spec, rng, cap);
      if (out.outcome == Outcome::pass) {
        ++tally.passed;
      } else if (out.outcome == Outcome::skip) {
        ++tally.skipped;
      } else {
        ++tally.failed;
        rep.counterexamples.push_back({tally.name, i, out.detail, model_to_json(spec)});
      }
    }
  }
  return rep;
}

json report_to_json(const VerificationReport& r) {
  json suites = json::array();
  for (const auto& s : r.suites) suites.push_back({{"name", s.name}, {"passed", s.passed}, {"failed", s.failed}, {"skipped", s.skipped}});
  json ce = json::array();
  for (const auto& c : r.counterexamples)
    ce.push_back({{"suite", c.suite}, {"trial", c.trial}, {"detail", c.detail}, {"model", c.model}});
  return {{"trials", r.trials}, {"ok", r.ok()}, {"suites", suites}, {"counterexamples", ce}};
}

AtomlessDemo atomless_demo(const ModelSpec& spec, const std::vector<Rational>& alpha) {
  AtomlessDemo demo;
  demo.alpha = alpha;
  std::set<std::vector<Rational>> seen;
  for (const auto& e : deterministic_occupations(spec)) {
    auto v = performance(spec, e.measure);
    if (seen.insert(v).second) demo.deterministic_values.push_back(std::move(v));
  }
  demo.achieved_deterministically = seen.count(alpha) > 0;
  try {
    demo.witness = match_performance(spec, alpha);
    demo.achievable = true;
  } catch (const Unachievable&) {
    demo.achievable = false;
  }
  return demo;
}

json atomless_demo_to_json(const ModelSpec& spec, const AtomlessDemo& demo) {
  auto strs = [](const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(to_string(q));
    return a;
  };
  json det = json::array();
  for (const auto& v : demo.deterministic_values) det.push_back(strs(v));
  json out = {{"alpha", strs(demo.alpha)},
              {"achievable", demo.achievable},
              {"deterministic_values", det},
              {"achieved_deterministically", demo.achieved_deterministically}};
  if (demo.witness) out["witness"] = {{"order", demo.witness->policy.order()}, {"policy", policy_to_json(spec, demo.witness->policy)}};
  return out;
}

}  // namespace absorbd
