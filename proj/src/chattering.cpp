#include "absorbd/chattering.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace absorbd {

std::vector<WeightedIndex> caratheodory_reduce(std::span<const Rational> weights,
                                               const std::vector<std::vector<Rational>>& points, bool minimal) {
  const std::size_t m = points.empty() ? 0 : points.front().size();

  // Merge identical points onto their first occurrence.
  std::vector<WeightedIndex> live;
  std::map<std::vector<Rational>, std::size_t> first;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [it, fresh] = first.emplace(points[i], live.size());
    if (fresh)
      live.push_back({i, weights[i]});
    else
      live[it->second].weight += weights[i];
  }

  for (;;) {
    const std::size_t k = live.size();
    if (k <= 1 || (!minimal && k <= m + 1)) break;
    // Affine dependency: sum z_i p_i = 0 and sum z_i = 0.
    Matrix<Rational> dep(m + 1, k, Rational(0));
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < m; ++i) dep(i, j) = points[live[j].index][i];
      dep(m, j) = 1;
    }
    auto kernel = null_space(dep);
    if (kernel.empty()) break;
    auto z = std::move(kernel.front());
    if (std::none_of(z.begin(), z.end(), [](const Rational& v) { return v.sign() > 0; }))
      for (auto& v : z) v = -v;
    // Step along -z until the first weight hits zero (smallest index on ties).
    std::size_t hit = k;
    Rational step = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (z[j].sign() <= 0) continue;
      Rational r = live[j].weight / z[j];
      if (hit == k || r < step) {
        hit = j;
        step = r;
      }
    }
    for (std::size_t j = 0; j < k; ++j) live[j].weight -= step * z[j];
    live[hit].weight = 0;
    std::erase_if(live, [](const WeightedIndex& w) { return w.weight.sign() <= 0; });
  }
  std::sort(live.begin(), live.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return live;
}

namespace {

/// Expected g(X_t, A_t) for a stage distribution nu over transient positions.
std::vector<Rational> stage_expectation(const ModelSpec& spec, const std::vector<Rational>& nu,
                                        const StationaryPolicy& kernel, const PairTable& g, std::size_t width) {
  const auto trans = spec.transient_states();
  std::vector<Rational> out(width, Rational(0));
  for (std::size_t i = 0; i < trans.size(); ++i) {
    if (nu[i].is_zero()) continue;
    const std::size_t x = trans[i];
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
      if (kernel.dist[x][a].is_zero()) continue;
      for (std::size_t c = 0; c < width; ++c) out[c] += nu[i] * kernel.dist[x][a] * g[x][a][c];
    }
  }
  return out;
}

PairTable split_rewards(const ModelSpec& spec) {
  PairTable g(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    for (const auto& r : spec.rewards[x]) {
      std::vector<Rational> v;
      for (const auto& ri : r) v.push_back(positive_part(ri));
      for (const auto& ri : r) v.push_back(negative_part(ri));
      g[x].push_back(std::move(v));
    }
  return g;
}

/// Value from time t+1 onward under pi, per transient position and criterion.
Matrix<Rational> tail_values(const ModelSpec& spec, const MarkovPolicy& pi, std::size_t t) {
  const auto trans = spec.transient_states();
  const std::size_t n = trans.size(), d = spec.d;
  Matrix<Rational> v = stationary_values<Rational>(spec, pi.tail, spec.rewards, d);
  for (std::size_t j = pi.horizon(); j-- > t + 1;) {
    Matrix<Rational> next(n, d, Rational(0));
    const auto& stage = pi.stages[j];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t x = trans[i];
      for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
        const Rational& w = stage.dist[x][a];
        if (w.is_zero()) continue;
        for (std::size_t c = 0; c < d; ++c) {
          Rational s = spec.rewards[x][a][c];
          for (std::size_t k = 0; k < n; ++k)
            if (!spec.kernel[x][a][trans[k]].is_zero()) s += spec.kernel[x][a][trans[k]] * v(k, c);
          next(i, c) += w * s;
        }
      }
    }
    v = std::move(next);
  }
  return v;
}

/// Reduces sigma(.|x) using per-action feature vectors; returns the new row.
std::vector<Rational> reduce_row(const std::vector<Rational>& row, const std::vector<std::vector<Rational>>& features,
                                 bool minimal) {
  std::vector<std::size_t> supp;
  std::vector<Rational> w;
  std::vector<std::vector<Rational>> pts;
  for (std::size_t a = 0; a < row.size(); ++a)
    if (row[a].sign() > 0) {
      supp.push_back(a);
      w.push_back(row[a]);
      pts.push_back(features[a]);
    }
  std::vector<Rational> out(row.size(), Rational(0));
  for (const auto& wi : caratheodory_reduce(w, pts, minimal)) out[supp[wi.index]] = wi.weight;
  return out;
}

}  // namespace

StageReduction stage_reduce(const ModelSpec& spec, const MarkovPolicy& pi, std::size_t t) {
  detail::require_absorbing(spec, AbsorptionCheck::verify);
  if (t >= pi.horizon()) throw std::out_of_range("stage " + std::to_string(t) + " is not below the horizon");
  if (auto e = check_policy(spec, pi.stages[t]); !e.empty()) throw PolicyError(e);

  const std::size_t d = spec.d;
  const auto trans = spec.transient_states();
  const auto h = tail_values(spec, pi, t);
  const auto split = split_rewards(spec);
  const std::size_t cap = 2 * d + 1;

  StageReduction out;
  out.stage = t;
  out.policy = pi;
  auto& kernel = out.policy.stages[t];
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    const std::size_t na = spec.actions[x].size();
    if (support_size(pi.stages[t], x) <= cap) {
      out.max_support = std::max(out.max_support, support_size(kernel, x));
      continue;
    }
    // Features: (r, Qh) always; (r+, r-, Qh) when that already fits the cap.
    std::vector<std::vector<Rational>> signed_f(na), split_f(na);
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<Rational> qh(d, Rational(0));
      for (std::size_t k = 0; k < trans.size(); ++k) {
        const auto& q = spec.kernel[x][a][trans[k]];
        if (q.is_zero()) continue;
        for (std::size_t c = 0; c < d; ++c) qh[c] += q * h(k, c);
      }
      signed_f[a] = spec.rewards[x][a];
      signed_f[a].insert(signed_f[a].end(), qh.begin(), qh.end());
      split_f[a] = split[x][a];
      split_f[a].insert(split_f[a].end(), qh.begin(), qh.end());
    }
    auto row = reduce_row(pi.stages[t].dist[x], split_f, true);
    if (static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](const Rational& v) { return v.sign() > 0; })) > cap)
      row = reduce_row(pi.stages[t].dist[x], signed_f, false);
    kernel.dist[x] = std::move(row);
    out.max_support = std::max(out.max_support, support_size(kernel, x));
  }

  const auto nu = state_distribution<Rational>(spec, pi, t);
  out.split_reward_before = stage_expectation(spec, nu, pi.stages[t], split, 2 * d);
  out.split_reward_after = stage_expectation(spec, nu, kernel, split, 2 * d);
  out.split_preserved = out.split_reward_before == out.split_reward_after;
  out.total_before = performance(spec, occupation_of_markov<Rational>(spec, pi, AbsorptionCheck::trusted));
  out.total_after = performance(spec, occupation_of_markov<Rational>(spec, out.policy, AbsorptionCheck::trusted));

  const auto signed_before = stage_expectation(spec, nu, pi.stages[t], spec.rewards, d);
  const auto signed_after = stage_expectation(spec, nu, kernel, spec.rewards, d);
  if (out.max_support > cap || out.total_before != out.total_after || signed_before != signed_after)
    throw InvariantViolation("stage reduction at t=" + std::to_string(t) + " changed the stage reward or total performance");
  return out;
}

MarkovPolicy reduce_all_stages(const ModelSpec& spec, const MarkovPolicy& pi) {
  MarkovPolicy cur = pi;
  for (std::size_t t = 0; t < pi.horizon(); ++t) cur = stage_reduce(spec, cur, t).policy;
  return cur;
}

ChatteringStationaryPolicy vertex_to_chattering(const ModelSpec& spec, std::span<const Rational> values, std::size_t p) {
  const auto pairs = spec.transient_pairs();
  if (values.size() < pairs.size()) throw std::invalid_argument("vertex has fewer coordinates than transient pairs");
  const auto mu = measure_from_values(spec, values.first(pairs.size()));
  const auto sigma = disintegrate(spec, mu);
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (support_size(sigma, x) > p + 1)
      throw OrderBoundViolated("vertex randomizes over " + std::to_string(support_size(sigma, x)) + " actions at " +
                               spec.states[x] + " with " + std::to_string(p) + " constraint rows; measure " +
                               measure_to_json(spec, mu).dump());
  auto gamma = pack_selectors(sigma, p + 1);
  const auto check = occupation_of_stationary<Rational>(spec, as_stationary(gamma, spec), AbsorptionCheck::trusted);
  if (!same_measure(check, mu)) throw InvariantViolation("chattering policy does not reproduce the vertex measure");
  return gamma;
}

MixtureDecomposition decompose_vertex(const ModelSpec& spec, std::span<const Rational> values, std::size_t bound) {
  const auto pairs = spec.transient_pairs();
  MixtureDecomposition mix;
  mix.target = measure_from_values(spec, values.first(pairs.size()));
  const auto sigma = disintegrate(spec, mix.target);
  const auto mx = mix.target.marginal(spec.num_states());

  // Deterministic candidates: any supported action at charged states, theta elsewhere.
  std::vector<std::size_t> charged;
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (mx[x].sign() > 0) charged.push_back(x);
  std::vector<std::vector<std::size_t>> options(charged.size());
  for (std::size_t i = 0; i < charged.size(); ++i)
    for (std::size_t a = 0; a < spec.actions[charged[i]].size(); ++a)
      if (sigma.dist[charged[i]][a].sign() > 0) options[i].push_back(a);

  std::vector<MixtureComponent> cands;
  std::set<std::vector<Rational>> seen;
  std::vector<std::size_t> odo(charged.size(), 0);
  for (;;) {
    DeterministicStationaryPolicy phi = first_action_policy(spec);
    for (std::size_t i = 0; i < charged.size(); ++i) phi.choice[charged[i]] = options[i][odo[i]];
    auto mu = occupation_of_stationary<Rational>(spec, phi, AbsorptionCheck::trusted);
    if (seen.insert(mu.mass).second) cands.push_back({Rational(0), phi, std::move(mu)});
    std::size_t k = charged.size();
    while (k > 0 && ++odo[k - 1] == options[k - 1].size()) odo[--k] = 0;
    if (k == 0) break;
  }

  const std::size_t nv = pairs.size();
  for (std::size_t size = 1; size <= std::min(bound, cands.size()); ++size) {
    std::vector<std::size_t> comb(size);
    for (std::size_t i = 0; i < size; ++i) comb[i] = i;
    for (;;) {
      Matrix<Rational> sys(nv + 1, size, Rational(0));
      std::vector<Rational> rhs(nv + 1);
      for (std::size_t j = 0; j < size; ++j) {
        for (std::size_t v = 0; v < nv; ++v) sys(v, j) = cands[comb[j]].measure.mass[v];
        sys(nv, j) = 1;
      }
      for (std::size_t v = 0; v < nv; ++v) rhs[v] = mix.target.mass[v];
      rhs[nv] = 1;
      if (auto sol = solve_general(sys, std::span<const Rational>(rhs))) {
        const auto& lam = sol->x;
        if (std::none_of(lam.begin(), lam.end(), [](const Rational& v) { return v.sign() < 0; })) {
          for (std::size_t j = 0; j < size; ++j)
            if (lam[j].sign() > 0) {
              auto c = cands[comb[j]];
              c.weight = lam[j];
              mix.components.push_back(std::move(c));
            }
          return mix;
        }
      }
      std::size_t k = size;
      while (k > 0 && comb[k - 1] == cands.size() - size + k - 1) --k;
      if (k == 0) break;
      ++comb[k - 1];
      for (std::size_t j = k; j < size; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  throw NoDecomposition("no convex combination of at most " + std::to_string(bound) +
                        " deterministic occupation measures reproduces " + measure_to_json(spec, mix.target).dump());
}

ChatteringStationaryPolicy mixture_to_stationary(const ModelSpec& spec, const MixtureDecomposition& mix) {
  // Merge components that share a selector.
  std::vector<MixtureComponent> comps;
  for (const auto& c : mix.components) {
    auto it = std::find_if(comps.begin(), comps.end(), [&](const auto& e) { return e.policy == c.policy; });
    if (it == comps.end())
      comps.push_back(c);
    else
      it->weight += c.weight;
  }
  if (comps.empty()) throw std::invalid_argument("empty mixture");

  const std::size_t n = spec.num_states(), p = comps.size();
  ChatteringStationaryPolicy gamma;
  for (const auto& c : comps) gamma.selectors.push_back(c.policy);
  std::vector<std::vector<Rational>> marg;
  for (const auto& c : comps) marg.push_back(c.measure.marginal(n));
  gamma.weights.assign(n, std::vector<Rational>(p, Rational(0)));
  for (std::size_t x = 0; x < n; ++x) {
    Rational denom = 0;
    for (std::size_t i = 0; i < p; ++i) denom += comps[i].weight * marg[i][x];
    if (denom.sign() <= 0) {
      gamma.weights[x][0] = 1;
      continue;
    }
    for (std::size_t i = 0; i < p; ++i) gamma.weights[x][i] = comps[i].weight * marg[i][x] / denom;
  }

  auto mixture = zero_measure<Rational>(spec);
  for (const auto& c : comps)
    for (std::size_t k = 0; k < mixture.mass.size(); ++k) mixture.mass[k] += c.weight * c.measure.mass[k];
  const auto check = occupation_of_stationary<Rational>(spec, as_stationary(gamma, spec), AbsorptionCheck::trusted);
  if (!same_measure(check, mixture)) throw InvariantViolation("chattering policy does not reproduce the mixture");
  return gamma;
}

MatchResult match_performance(const ModelSpec& spec, const std::vector<Rational>& target) {
  detail::require_absorbing(spec, AbsorptionCheck::verify);
  if (target.size() != spec.d)
    throw std::invalid_argument("target has " + std::to_string(target.size()) + " entries, model has d = " + std::to_string(spec.d));
  const auto poly = build_polytope(spec, {IntegralConstraint{spec.rewards, target}});
  auto bfs = lp::feasible_point(poly.lp);
  if (!bfs) throw Unachievable("target is outside the achievable performance set");
  MatchResult res;
  res.policy = vertex_to_chattering(spec, bfs->values, spec.d);
  const auto mu = occupation_of_stationary<Rational>(spec, as_stationary(res.policy, spec), AbsorptionCheck::trusted);
  res.performance = performance(spec, mu);
  for (std::size_t i = 0; i < spec.d; ++i) res.residual.push_back(res.performance[i] - target[i]);
  if (res.performance != target) throw InvariantViolation("matched policy misses the target");
  return res;
}

}  // namespace absorbd
