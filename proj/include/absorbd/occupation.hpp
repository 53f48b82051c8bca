#pragma once

#include "absorbd/linalg.hpp"
#include "absorbd/model.hpp"
#include "absorbd/policy.hpp"

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace absorbd {

/// A vector-valued function on state-action pairs, shaped like ModelSpec::rewards:
/// table[x][a][i].
using PairTable = std::vector<std::vector<std::vector<Rational>>>;

/// Nonnegative measure on the transient pairs of a model, stored densely in
/// ModelSpec::transient_pairs() order.
template <class T>
struct OccupationMeasure {
  std::vector<StateAction> pairs;
  std::vector<T> mass;

  T total() const {
    T s(0);
    for (const auto& m : mass) s += m;
    return s;
  }

  /// mu^X over all states (zero on Delta).
  std::vector<T> marginal(std::size_t num_states) const {
    std::vector<T> m(num_states, T(0));
    for (std::size_t k = 0; k < pairs.size(); ++k) m[pairs[k].state] += mass[k];
    return m;
  }

  friend bool operator==(const OccupationMeasure&, const OccupationMeasure&) = default;
};

using ExactMeasure = OccupationMeasure<Rational>;

enum class AbsorptionCheck { verify, trusted };

namespace detail {

inline void require_absorbing(const ModelSpec& spec, AbsorptionCheck check) {
  if (check == AbsorptionCheck::trusted) return;
  if (!check_uniform_absorption(spec).uniformly_absorbing) throw NotAbsorbing("model is not uniformly absorbing");
}

/// Row vector m solving m (I - B) = source, over transient positions.
template <class T>
std::vector<T> expected_visits(const Matrix<T>& b, const std::vector<T>& source, const Arith<T>& ar) {
  const std::size_t n = b.rows();
  Matrix<T> a(n, n, T(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? T(1) : T(0)) - b(i, j);
  auto m = solve_left(a, std::span<const T>(source), ar);
  if (!m) throw NotAbsorbing("I - Q_sigma is singular on the transient states");
  return *m;
}

template <class T>
std::vector<T> transient_eta(const ModelSpec& spec) {
  std::vector<T> out;
  for (auto x : spec.transient_states()) out.push_back(Arith<T>::from(spec.eta[x]));
  return out;
}

/// Adds state masses m (transient positions) spread by sigma into mu.
template <class T>
void spread(const ModelSpec& spec, const std::vector<T>& m, const StationaryPolicy& sigma, OccupationMeasure<T>& mu) {
  const auto trans = spec.transient_states();
  std::vector<std::size_t> pos(spec.num_states(), 0);
  for (std::size_t i = 0; i < trans.size(); ++i) pos[trans[i]] = i;
  for (std::size_t k = 0; k < mu.pairs.size(); ++k) {
    const auto [x, a] = mu.pairs[k];
    const Rational& w = sigma.dist[x][a];
    if (!w.is_zero()) mu.mass[k] += m[pos[x]] * Arith<T>::from(w);
  }
}

template <class T>
std::vector<T> step(const Matrix<T>& b, const std::vector<T>& nu) {
  std::vector<T> out(b.cols(), T(0));
  for (std::size_t i = 0; i < b.rows(); ++i) {
    if (nu[i] == T(0)) continue;
    for (std::size_t j = 0; j < b.cols(); ++j) out[j] += nu[i] * b(i, j);
  }
  return out;
}

}  // namespace detail

template <class T>
OccupationMeasure<T> zero_measure(const ModelSpec& spec) {
  OccupationMeasure<T> mu;
  mu.pairs = spec.transient_pairs();
  mu.mass.assign(mu.pairs.size(), T(0));
  return mu;
}

/// mu_sigma: state masses solve m = eta|Delta^c + m B_sigma, then mass(x,a) = m(x) sigma(a|x).
template <class T = Rational>
OccupationMeasure<T> occupation_of_stationary(const ModelSpec& spec, const StationaryPolicy& sigma,
                                              AbsorptionCheck check = AbsorptionCheck::verify, const Arith<T>& ar = {}) {
  detail::require_absorbing(spec, check);
  auto mu = zero_measure<T>(spec);
  if (mu.pairs.empty()) return mu;
  auto m = detail::expected_visits(kernel_under<T>(spec, sigma), detail::transient_eta<T>(spec), ar);
  detail::spread(spec, m, sigma, mu);
  return mu;
}

template <class T = Rational>
OccupationMeasure<T> occupation_of_stationary(const ModelSpec& spec, const DeterministicStationaryPolicy& phi,
                                              AbsorptionCheck check = AbsorptionCheck::verify, const Arith<T>& ar = {}) {
  return occupation_of_stationary<T>(spec, as_stationary(phi, spec), check, ar);
}

/// State distribution eta Q_pi^{(t)} restricted to Delta^c (transient positions).
template <class T = Rational>
std::vector<T> state_distribution(const ModelSpec& spec, const MarkovPolicy& pi, std::size_t t) {
  auto nu = detail::transient_eta<T>(spec);
  for (std::size_t j = 0; j < t; ++j) nu = detail::step(kernel_under<T>(spec, pi.at(j)), nu);
  return nu;
}

/// Exact two-phase occupation measure: stages 0..T-1 accumulated directly, the
/// stationary tail closed with a linear solve from the time-T distribution.
template <class T = Rational>
OccupationMeasure<T> occupation_of_markov(const ModelSpec& spec, const MarkovPolicy& pi,
                                          AbsorptionCheck check = AbsorptionCheck::verify, const Arith<T>& ar = {}) {
  detail::require_absorbing(spec, check);
  auto mu = zero_measure<T>(spec);
  if (mu.pairs.empty()) return mu;
  auto nu = detail::transient_eta<T>(spec);
  for (std::size_t t = 0; t < pi.horizon(); ++t) {
    detail::spread(spec, nu, pi.stages[t], mu);
    nu = detail::step(kernel_under<T>(spec, pi.stages[t]), nu);
  }
  auto m = detail::expected_visits(kernel_under<T>(spec, pi.tail), nu, ar);
  detail::spread(spec, m, pi.tail, mu);
  return mu;
}

/// mu(g) for a pair table g of width w.
template <class T>
std::vector<T> integrate(const OccupationMeasure<T>& mu, const PairTable& g, std::size_t width) {
  std::vector<T> out(width, T(0));
  for (std::size_t k = 0; k < mu.pairs.size(); ++k) {
    if (mu.mass[k] == T(0)) continue;
    const auto& v = g[mu.pairs[k].state][mu.pairs[k].action];
    for (std::size_t i = 0; i < width; ++i)
      if (!v[i].is_zero()) out[i] += mu.mass[k] * Arith<T>::from(v[i]);
  }
  return out;
}

/// Performance vector R = mu(r).
template <class T>
std::vector<T> performance(const ModelSpec& spec, const OccupationMeasure<T>& mu) {
  return integrate(mu, spec.rewards, spec.d);
}

/// res(y) = mu^X(y) - eta(y) - sum mu(x,a) Q(y|x,a) over transient y. Zero iff
/// mu solves the characteristic equations.
template <class T>
std::vector<T> characteristic_residual(const ModelSpec& spec, const OccupationMeasure<T>& mu) {
  const auto trans = spec.transient_states();
  std::vector<T> res;
  const auto mx = mu.marginal(spec.num_states());
  for (auto y : trans) res.push_back(mx[y] - Arith<T>::from(spec.eta[y]));
  for (std::size_t k = 0; k < mu.pairs.size(); ++k) {
    if (mu.mass[k] == T(0)) continue;
    const auto& row = spec.kernel[mu.pairs[k].state][mu.pairs[k].action];
    for (std::size_t j = 0; j < trans.size(); ++j)
      if (!row[trans[j]].is_zero()) res[j] -= mu.mass[k] * Arith<T>::from(row[trans[j]]);
  }
  return res;
}

/// sigma(a|x) = mu(x,a) / mu^X(x) where mu^X(x) > 0, the first admissible action elsewhere.
StationaryPolicy disintegrate(const ModelSpec& spec, const ExactMeasure& mu);
/// Floating variant: masses within eps of zero are dropped and each row is
/// renormalized exactly.
StationaryPolicy disintegrate(const ModelSpec& spec, const OccupationMeasure<double>& mu, const Arith<double>& ar);

/// Per-state value of a stationary policy: V = (I - B_sigma)^{-1} g_sigma over
/// transient positions, one column per component of g.
template <class T = Rational>
Matrix<T> stationary_values(const ModelSpec& spec, const StationaryPolicy& sigma, const PairTable& g, std::size_t width,
                            const Arith<T>& ar = {}) {
  const auto trans = spec.transient_states();
  const std::size_t n = trans.size();
  Matrix<T> b = kernel_under<T>(spec, sigma);
  Matrix<T> a(n, n, T(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? T(1) : T(0)) - b(i, j);
  Matrix<T> values(n, width, T(0));
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<T> rhs(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t x = trans[i];
      for (std::size_t act = 0; act < spec.actions[x].size(); ++act)
        if (!sigma.dist[x][act].is_zero() && !g[x][act][c].is_zero())
          rhs[i] += Arith<T>::from(sigma.dist[x][act] * g[x][act][c]);
    }
    auto v = solve_square(a, std::span<const T>(rhs), ar);
    if (!v) throw NotAbsorbing("I - Q_sigma is singular on the transient states");
    for (std::size_t i = 0; i < n; ++i) values(i, c) = (*v)[i];
  }
  return values;
}

/// Whether two exact measures agree on every pair.
inline bool same_measure(const ExactMeasure& a, const ExactMeasure& b) { return a.mass == b.mass; }

nlohmann::json measure_to_json(const ModelSpec& spec, const ExactMeasure& mu);
nlohmann::json measure_to_json(const ModelSpec& spec, const OccupationMeasure<double>& mu);
ExactMeasure measure_from_values(const ModelSpec& spec, std::span<const Rational> values);

}  // namespace absorbd
