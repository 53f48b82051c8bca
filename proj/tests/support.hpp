#pragma once

// Shared fixtures and independent oracles for the test programs. The oracles
// use their own dense Gauss-Jordan on nested vectors so they do not lean on
// the library's linear algebra.

#include "absorbd/model.hpp"
#include "absorbd/policy.hpp"

#include <string>
#include <vector>

namespace testsupport {

using absorbd::ModelSpec;
using absorbd::Rational;

inline std::string fixture(const std::string& name) { return std::string(ABSORBD_FIXTURE_DIR) + "/" + name; }

inline ModelSpec twostate() { return absorbd::load_model(fixture("twostate.json")); }

inline Rational q(long long p, long long d = 1) { return Rational(p, d); }

inline std::vector<Rational> qs(std::initializer_list<Rational> v) { return std::vector<Rational>(v); }

/// Solves x M = b for square invertible M by Gauss-Jordan on M^T.
inline std::vector<Rational> oracle_solve_left(std::vector<std::vector<Rational>> m, std::vector<Rational> b) {
  const std::size_t n = b.size();
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m[j][i];
    a[i][n] = b[i];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (a[p][c] == 0) ++p;
    std::swap(a[p], a[c]);
    const Rational inv = 1 / a[c][c];
    for (auto& v : a[c]) v *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Rational f = a[r][c];
      for (std::size_t k = 0; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a[i][n];
  return x;
}

/// Occupation masses of a stationary policy in transient_pairs() order.
inline std::vector<Rational> oracle_occupation(const ModelSpec& spec, const absorbd::StationaryPolicy& sigma) {
  std::vector<std::size_t> trans;
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (!spec.is_delta(x)) trans.push_back(x);
  const std::size_t n = trans.size();
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n, Rational(0)));
  std::vector<Rational> eta(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = 1;
    eta[i] = spec.eta[trans[i]];
    for (std::size_t a = 0; a < spec.actions[trans[i]].size(); ++a)
      for (std::size_t j = 0; j < n; ++j) m[i][j] -= sigma.dist[trans[i]][a] * spec.kernel[trans[i]][a][trans[j]];
  }
  const auto visits = n ? oracle_solve_left(m, eta) : std::vector<Rational>{};
  std::vector<Rational> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < spec.actions[trans[i]].size(); ++a) out.push_back(visits[i] * sigma.dist[trans[i]][a]);
  return out;
}

inline std::vector<Rational> oracle_performance(const ModelSpec& spec, const std::vector<Rational>& mass) {
  std::vector<Rational> r(spec.d, Rational(0));
  std::size_t k = 0;
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    if (spec.is_delta(x)) continue;
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a, ++k)
      for (std::size_t i = 0; i < spec.d; ++i) r[i] += mass[k] * spec.rewards[x][a][i];
  }
  return r;
}

inline Rational total(const std::vector<Rational>& v) {
  Rational s = 0;
  for (const auto& x : v) s += x;
  return s;
}

/// Deterministic policy on twostate choosing action index a at s0.
inline absorbd::DeterministicStationaryPolicy pick(const ModelSpec& spec, std::size_t a) {
  auto phi = absorbd::first_action_policy(spec);
  phi.choice[*spec.state_index("s0")] = a;
  return phi;
}

}  // namespace testsupport

namespace testsupport {

/// Occupation masses of an eventually stationary Markov policy: explicit
/// stage-by-stage propagation, then the stationary oracle from the time-T law.
inline std::vector<Rational> oracle_markov_occupation(const ModelSpec& spec, const absorbd::MarkovPolicy& pi) {
  std::vector<std::size_t> trans;
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (!spec.is_delta(x)) trans.push_back(x);
  std::vector<Rational> nu(spec.num_states(), Rational(0));
  for (auto x : trans) nu[x] = spec.eta[x];
  std::vector<Rational> mass;
  for (auto x : trans) mass.resize(mass.size() + spec.actions[x].size(), Rational(0));
  for (std::size_t t = 0; t < pi.horizon(); ++t) {
    std::vector<Rational> next(spec.num_states(), Rational(0));
    std::size_t k = 0;
    for (auto x : trans)
      for (std::size_t a = 0; a < spec.actions[x].size(); ++a, ++k) {
        const Rational w = nu[x] * pi.stages[t].dist[x][a];
        mass[k] += w;
        for (auto y : trans) next[y] += w * spec.kernel[x][a][y];
      }
    nu = next;
  }
  ModelSpec shifted = spec;
  shifted.eta = nu;
  const auto tail = oracle_occupation(shifted, pi.tail);
  for (std::size_t k = 0; k < mass.size(); ++k) mass[k] += tail[k];
  return mass;
}

}  // namespace testsupport
