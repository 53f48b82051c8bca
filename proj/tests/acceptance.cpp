// Acceptance run: one line per criterion, exit status 1 if any criterion fails.
// Expected values come from the oracles in support.hpp or from hand arithmetic
// written next to each literal.

#include "absorbd/chattering.hpp"
#include "absorbd/geometry.hpp"
#include "absorbd/harness.hpp"
#include "absorbd/montecarlo.hpp"
#include "absorbd/occupation.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

using namespace absorbd;
using testsupport::oracle_markov_occupation;
using testsupport::oracle_occupation;
using testsupport::oracle_performance;
using testsupport::q;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict fixture_identities() {
  const auto t0 = Clock::now();
  const auto spec = testsupport::twostate();
  const auto a1 = testsupport::pick(spec, 0), a2 = testsupport::pick(spec, 1);
  const auto m1 = occupation_of_stationary<Rational>(spec, a1);
  const auto m2 = occupation_of_stationary<Rational>(spec, a2);
  const auto mu = occupation_of_stationary<Rational>(spec, uniform_policy(spec));
  int bad = 0;
  // m = 1/(1 - B) with B = 0, 1/2, 1/4; mass(x,a) = m * sigma(a).
  bad += m1.mass != testsupport::qs({q(1), q(0)});
  bad += m2.mass != testsupport::qs({q(0), q(2)});
  bad += mu.mass != testsupport::qs({q(2, 3), q(2, 3)});
  // R = 1*1, 2*2/5, 2/3*1 + 2/3*2/5
  bad += performance(spec, m1) != testsupport::qs({q(1)});
  bad += performance(spec, m2) != testsupport::qs({q(4, 5)});
  bad += performance(spec, mu) != testsupport::qs({q(14, 15)});
  bad += m1.total() != 1;
  bad += m2.total() != 2;
  bad += mu.total() != q(4, 3);
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 1.0, fmt("%d/9 identities wrong, %.3f s", bad, secs)};
}

Verdict extreme_points() {
  const auto t0 = Clock::now();
  std::size_t ok = 0, n = 0, vertices = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    GenConfig cfg;
    cfg.seed = substream_seed(2001, i);
    cfg.min_states = 1;
    cfg.max_states = 3;  // plus one absorbing state: at most 4 states
    cfg.min_actions = 1;
    cfg.max_actions = 3;
    cfg.d = 1 + i % 2;
    const auto spec = generate(cfg);
    std::set<std::vector<Rational>> oracle;
    for (const auto& phi : enumerate_deterministic(spec)) oracle.insert(oracle_occupation(spec, as_stationary(phi, spec)));
    std::set<std::vector<Rational>> verts;
    for (const auto& v : lp::enumerate_vertices(build_polytope(spec).lp)) verts.insert(v.values);
    vertices += verts.size();
    ++n;
    ok += verts == oracle;
  }
  const double secs = seconds_since(t0);
  return {ok == n && secs < 60, fmt("%zu/%zu instances with exact set equality, %zu vertices, %.1f s", ok, n, vertices, secs)};
}

Verdict dubins() {
  std::size_t ok = 0, n = 0, vertices = 0, max_order = 0;
  std::string first_failure;
  for (std::uint64_t i = 0; i < 100; ++i) {
    GenConfig cfg;
    cfg.seed = substream_seed(3001, i);
    cfg.max_states = 3;
    cfg.max_actions = 3;
    const auto spec = generate(cfg);
    Rng rng(cfg.seed);
    const std::size_t p = 1 + i % 2;
    PairTable g(spec.num_states());
    for (std::size_t x = 0; x < spec.num_states(); ++x)
      for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
        std::vector<Rational> row;
        for (std::size_t c = 0; c < p; ++c) row.emplace_back(spec.is_delta(x) ? 0 : rng.between(-3, 3));
        g[x].push_back(std::move(row));
      }
    // alpha from a random policy keeps the constraints feasible.
    const auto sigma = random_stationary(spec, rng);
    const auto mass = oracle_occupation(spec, sigma);
    std::vector<Rational> alpha(p, Rational(0));
    const auto pairs = spec.transient_pairs();
    for (std::size_t k = 0; k < pairs.size(); ++k)
      for (std::size_t c = 0; c < p; ++c) alpha[c] += mass[k] * g[pairs[k].state][pairs[k].action][c];

    bool good = true;
    try {
      const auto verts = lp::enumerate_vertices(build_polytope(spec, {{g, alpha}}).lp);
      good = !verts.empty();
      for (const auto& v : verts) {
        ++vertices;
        const auto mix = decompose_vertex(spec, v.values, p + 1);
        std::vector<Rational> sum(v.values.size(), Rational(0));
        Rational wsum = 0;
        for (const auto& c : mix.components) {
          wsum += c.weight;
          const auto m = oracle_occupation(spec, as_stationary(c.policy, spec));
          for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += c.weight * m[k];
        }
        const auto gamma = vertex_to_chattering(spec, v.values, p);
        max_order = std::max(max_order, gamma.order());
        good = good && mix.components.size() <= p + 1 && wsum == 1 && sum == v.values && gamma.order() <= p + 1 &&
               oracle_occupation(spec, as_stationary(gamma, spec)) == v.values;
      }
    } catch (const std::exception& e) {
      good = false;
      if (first_failure.empty()) first_failure = e.what();
    }
    ++n;
    ok += good;
  }
  return {ok == n, fmt("%zu/%zu instances, %zu vertices all decomposed, max order %zu%s%s", ok, n, vertices, max_order,
                       first_failure.empty() ? "" : "; ", first_failure.c_str())};
}

Verdict sufficiency() {
  std::size_t ok = 0, n = 0, by_kind[3] = {0, 0, 0};
  for (std::uint64_t i = 0; i < 210; ++i) {
    GenConfig cfg;
    cfg.seed = substream_seed(4001, i);
    cfg.d = 1 + i % 3;
    cfg.max_actions = 4;
    const auto spec = generate(cfg);
    Rng rng(cfg.seed);
    const auto kind = (i / 3) % 3;
    MarkovPolicy pi;
    if (kind == 0)
      pi.tail = random_stationary(spec, rng);
    else if (kind == 1)
      pi.tail = as_stationary(random_chattering(spec, rng, 2 + rng.below(3)), spec);
    else
      pi = random_markov(spec, rng, 1 + rng.below(3));
    ++by_kind[kind];
    const auto target = oracle_performance(spec, oracle_markov_occupation(spec, pi));
    bool good = false;
    try {
      const auto m = match_performance(spec, target);
      good = m.policy.order() <= spec.d + 1 && oracle_performance(spec, oracle_occupation(spec, as_stationary(m.policy, spec))) == target;
    } catch (const std::exception&) {
    }
    ++n;
    ok += good;
  }
  return {ok == n, fmt("%zu/%zu pairs matched exactly with order <= d+1 (stationary %zu, chattering %zu, markov %zu; d in {1,2,3})", ok,
                       n, by_kind[0], by_kind[1], by_kind[2])};
}

Verdict stage_reduction() {
  std::size_t n = 0, reduced = 0, support_ok = 0, total_ok = 0, split_ok = 0, iterate_ok = 0, all_ok = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    GenConfig cfg;
    cfg.seed = substream_seed(5001, i);
    cfg.d = 1 + i % 2;
    cfg.max_states = 3;
    cfg.min_actions = 2;
    cfg.max_actions = 6;
    const auto spec = generate(cfg);
    Rng rng(cfg.seed);
    const auto pi = random_markov(spec, rng, 1 + rng.below(3));
    const std::size_t t = rng.below(pi.horizon());
    ++n;
    try {
      const auto red = stage_reduce(spec, pi, t);
      std::size_t widest = 0, widest_before = 0;
      for (std::size_t x = 0; x < spec.num_states(); ++x) {
        widest = std::max(widest, support_size(red.policy.stages[t], x));
        widest_before = std::max(widest_before, support_size(pi.stages[t], x));
      }
      reduced += widest_before > 2 * spec.d + 1;
      const auto before = oracle_performance(spec, oracle_markov_occupation(spec, pi));
      const bool s = widest <= 2 * spec.d + 1;
      const bool tot = oracle_performance(spec, oracle_markov_occupation(spec, red.policy)) == before;
      const bool spl = red.split_reward_before == red.split_reward_after;
      const bool it = oracle_performance(spec, oracle_markov_occupation(spec, reduce_all_stages(spec, pi))) == before;
      support_ok += s;
      total_ok += tot;
      split_ok += spl;
      iterate_ok += it;
      all_ok += s && tot && spl && it;
    } catch (const std::exception&) {
    }
  }
  return {all_ok == n, fmt("%zu/%zu pairs fully preserved (%zu needed reduction): support<=2d+1 %zu, total kept %zu, "
                           "stage (r+,r-) kept %zu, all-stage iteration kept %zu",
                           all_ok, n, reduced, support_ok, total_ok, split_ok, iterate_ok)};
}

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Verdict support_restriction() {
  std::size_t n = 0, ok = 0, peaked = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    GenConfig cfg;
    cfg.seed = substream_seed(6001, i);
    cfg.d = 1 + i % 2;
    cfg.max_states = 3;
    cfg.max_actions = 3;
    const auto spec = generate(cfg);
    Rng rng(cfg.seed);
    const auto sigma = random_stationary(spec, rng);
    const auto beta = oracle_performance(spec, oracle_occupation(spec, sigma));
    const auto star = restrict_to_support(spec, sigma);
    // Oracle image: hull of the restricted model's deterministic performances.
    std::vector<std::vector<Rational>> pts;
    for (const auto& phi : enumerate_deterministic(star)) pts.push_back(oracle_performance(star, oracle_occupation(star, as_stationary(phi, star))));
    const auto image = hull_of(spec.d, pts);
    const auto lib_image = image_polytope(star, build_polytope(star));
    bool good = std::set<std::vector<Rational>>(image.vertices.begin(), image.vertices.end()) ==
                std::set<std::vector<Rational>>(lib_image.vertices.begin(), lib_image.vertices.end());
    good = good && relative_interior_contains(image, beta);

    std::vector<std::vector<Rational>> functionals = affine_hull_normals(image);
    for (int k = 0; k < 12; ++k) {
      std::vector<Rational> c;
      for (std::size_t j = 0; j < spec.d; ++j) c.emplace_back(rng.between(-2, 2));
      functionals.push_back(std::move(c));
    }
    for (const auto& c : functionals) {
      Rational best = dot(c, image.vertices.front());
      for (const auto& v : image.vertices) best = std::max(best, dot(c, v));
      if (dot(c, beta) != best) continue;
      ++peaked;
      for (const auto& v : image.vertices) good = good && dot(c, v) == best;
    }
    ++n;
    ok += good;
  }
  return {ok == n, fmt("%zu/%zu (instance, sigma) pairs in the relative interior; %zu functionals peaked at the point, all constant", ok,
                       n, peaked)};
}

Verdict atomless() {
  const auto spec = testsupport::twostate();
  const auto demo = atomless_demo(spec, {q(14, 15)});
  // R(D) = {1, 4/5}: the two deterministic policies.
  std::set<std::vector<Rational>> det(demo.deterministic_values.begin(), demo.deterministic_values.end());
  const bool det_ok = det == std::set<std::vector<Rational>>{{q(1)}, {q(4, 5)}};
  bool witness_ok = demo.witness &&
                    oracle_performance(spec, oracle_occupation(spec, as_stationary(demo.witness->policy, spec))) == testsupport::qs({q(14, 15)});
  return {det_ok && demo.achievable && witness_ok && !demo.achieved_deterministically,
          fmt("14/15 achieved by an order-%zu chattering policy; deterministic values {1, 4/5} %s", demo.witness ? demo.witness->policy.order() : 0,
              det_ok ? "confirmed" : "differ")};
}

Verdict monte_carlo() {
  std::size_t within = 0, n = 0;
  bool reproducible = true;
  for (std::uint64_t i = 0; i < 20; ++i) {
    ModelSpec spec;
    if (i == 0) {
      spec = testsupport::twostate();
    } else {
      GenConfig cfg;
      cfg.seed = substream_seed(8001, i);
      cfg.d = 1 + i % 2;
      spec = generate(cfg);
    }
    Rng rng(substream_seed(8002, i));
    MarkovPolicy pi;
    if (i % 3 == 0)
      pi.tail = random_stationary(spec, rng);
    else if (i % 3 == 1)
      pi.tail = as_stationary(random_chattering(spec, rng, 2), spec);
    else
      pi = random_markov(spec, rng, 2);
    const auto mass = oracle_markov_occupation(spec, pi);
    const auto exact = oracle_performance(spec, mass);
    const double time = testsupport::total(mass).convert_to<double>();
    const SimConfig sc{substream_seed(8003, i), 100000};
    const auto r = simulate(spec, pi, sc);
    bool good = std::abs(r.mean_time - time) <= 4 * r.time_se;
    for (std::size_t c = 0; c < spec.d; ++c) good = good && std::abs(r.performance[c] - exact[c].convert_to<double>()) <= 4 * r.performance_se[c];
    within += good;
    ++n;
    if (i < 3) {
      const auto again = simulate(spec, pi, sc);
      reproducible = reproducible && again.time_samples == r.time_samples && again.performance == r.performance &&
                     again.occupation == r.occupation && again.performance_se == r.performance_se;
    }
  }
  return {within >= 19 && reproducible,
          fmt("%zu/%zu pairs within 4 SE at 1e5 episodes; reruns %s", within, n, reproducible ? "bit-identical" : "DIFFER")};
}

// Worst-case survival recursion, written independently of the library.
std::vector<Rational> survival(const ModelSpec& spec, std::size_t steps) {
  std::vector<Rational> w(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x) w[x] = spec.is_delta(x) ? 0 : 1;
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<Rational> next(spec.num_states(), Rational(0));
    for (std::size_t x = 0; x < spec.num_states(); ++x) {
      if (spec.is_delta(x)) continue;
      for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
        Rational s = 0;
        for (std::size_t y = 0; y < spec.num_states(); ++y) s += spec.kernel[x][a][y] * w[y];
        next[x] = std::max(next[x], s);
      }
    }
    w = next;
  }
  return w;
}

bool valid_cycle(const ModelSpec& spec, const std::vector<StateAction>& cycle, std::size_t expected_len) {
  if (cycle.size() != expected_len) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const auto& [x, a] = cycle[i];
    if (spec.is_delta(x) || a >= spec.actions[x].size()) return false;
    Rational stay = 0;
    for (std::size_t y = 0; y < spec.num_states(); ++y)
      if (!spec.is_delta(y)) stay += spec.kernel[x][a][y];
    if (stay != 1 || spec.kernel[x][a][cycle[(i + 1) % cycle.size()].state].is_zero()) return false;
  }
  return true;
}

Verdict absorption() {
  int ok = 0;
  std::ostringstream why;
  {
    const auto spec = load_model(testsupport::fixture("selfloop.json"));
    const auto r = check_uniform_absorption(spec);
    const bool good = !r.uniformly_absorbing && valid_cycle(spec, r.cycle, 1);
    ok += good;
    why << "self-loop " << (good ? "ok" : "WRONG");
  }
  {
    const auto spec = load_model(testsupport::fixture("cycle3.json"));
    const auto r = check_uniform_absorption(spec);
    const bool good = !r.uniformly_absorbing && valid_cycle(spec, r.cycle, 3);
    ok += good;
    why << ", 3-cycle " << (good ? "ok" : "WRONG");
  }
  {
    const auto spec = load_model(testsupport::fixture("onestep.json"));
    const auto r = check_uniform_absorption(spec);
    bool good = r.uniformly_absorbing && r.period >= 1 && r.rho < 1;
    if (good) {
      const auto w = survival(spec, r.period);
      for (std::size_t x = 0; x < spec.num_states(); ++x) good = good && w[x] <= r.rho;
    }
    ok += good;
    why << ", one-step " << (good ? "ok" : "WRONG");
  }
  return {ok == 3, fmt("%d/3 verdicts with valid certificates (%s)", ok, why.str().c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"fixture identities", fixture_identities},
      {"vertices equal deterministic occupation measures", extreme_points},
      {"constrained vertices need at most p+1 deterministic measures", dubins},
      {"chattering order d+1 matches every performance vector", sufficiency},
      {"stage reduction", stage_reduction},
      {"support restriction relative interior", support_restriction},
      {"chattering value unreachable by deterministic policies", atomless},
      {"Monte Carlo agreement", monte_carlo},
      {"absorption classifier", absorption},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
