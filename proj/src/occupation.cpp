#include "absorbd/occupation.hpp"

namespace absorbd {

using nlohmann::json;

StationaryPolicy disintegrate(const ModelSpec& spec, const ExactMeasure& mu) {
  StationaryPolicy sigma = as_stationary(first_action_policy(spec), spec);
  const auto mx = mu.marginal(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (mx[x].sign() > 0) sigma.dist[x].assign(spec.actions[x].size(), Rational(0));
  for (std::size_t k = 0; k < mu.pairs.size(); ++k) {
    const auto [x, a] = mu.pairs[k];
    if (mx[x].sign() > 0) sigma.dist[x][a] = mu.mass[k] / mx[x];
  }
  return sigma;
}

StationaryPolicy disintegrate(const ModelSpec& spec, const OccupationMeasure<double>& mu, const Arith<double>& ar) {
  StationaryPolicy sigma = as_stationary(first_action_policy(spec), spec);
  std::vector<double> mx(spec.num_states(), 0.0);
  for (std::size_t k = 0; k < mu.pairs.size(); ++k)
    if (ar.positive(mu.mass[k])) mx[mu.pairs[k].state] += mu.mass[k];
  std::vector<std::vector<std::size_t>> supp(spec.num_states());
  for (std::size_t k = 0; k < mu.pairs.size(); ++k) {
    const auto [x, a] = mu.pairs[k];
    if (!ar.positive(mx[x]) || !ar.positive(mu.mass[k])) continue;
    if (supp[x].empty()) sigma.dist[x].assign(spec.actions[x].size(), Rational(0));
    supp[x].push_back(a);
    sigma.dist[x][a] = Rational(mu.mass[k] / mx[x]);
  }
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    if (supp[x].empty()) continue;
    Rational rest = 1;
    for (std::size_t i = 0; i + 1 < supp[x].size(); ++i) rest -= sigma.dist[x][supp[x][i]];
    sigma.dist[x][supp[x].back()] = rest;
  }
  return sigma;
}

namespace {

template <class T>
json number_json(const T& v) {
  return to_string(v);
}

template <class T>
json measure_json(const ModelSpec& spec, const OccupationMeasure<T>& mu) {
  json mass = json::array();
  for (std::size_t k = 0; k < mu.pairs.size(); ++k) {
    if (mu.mass[k] == T(0)) continue;
    const auto [x, a] = mu.pairs[k];
    mass.push_back({{"x", spec.states[x]}, {"a", spec.actions[x][a]}, {"value", number_json(mu.mass[k])}});
  }
  json marginal = json::object();
  const auto mx = mu.marginal(spec.num_states());
  for (auto x : spec.transient_states()) marginal[spec.states[x]] = number_json(mx[x]);
  json perf = json::array();
  for (const auto& v : performance(spec, mu)) perf.push_back(number_json(v));
  return {{"mass", mass}, {"marginal", marginal}, {"total_mass", number_json(mu.total())}, {"performance", perf}};
}

}  // namespace

json measure_to_json(const ModelSpec& spec, const ExactMeasure& mu) { return measure_json(spec, mu); }
json measure_to_json(const ModelSpec& spec, const OccupationMeasure<double>& mu) { return measure_json(spec, mu); }

ExactMeasure measure_from_values(const ModelSpec& spec, std::span<const Rational> values) {
  auto mu = zero_measure<Rational>(spec);
  for (std::size_t k = 0; k < mu.pairs.size(); ++k) mu.mass[k] = values[k];
  return mu;
}

}  // namespace absorbd
