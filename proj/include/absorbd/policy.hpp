#pragma once

#include "absorbd/linalg.hpp"
#include "absorbd/model.hpp"

#include <json.hpp>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace absorbd {

/// phi in D: one admissible action index per state.
struct DeterministicStationaryPolicy {
  std::vector<std::size_t> choice;
  friend bool operator==(const DeterministicStationaryPolicy&, const DeterministicStationaryPolicy&) = default;
};

/// sigma in S: dist[x][a] is the probability of action a at state x.
struct StationaryPolicy {
  std::vector<std::vector<Rational>> dist;
  friend bool operator==(const StationaryPolicy&, const StationaryPolicy&) = default;
};

/// gamma in C_p: p deterministic selectors mixed with state-dependent weights
/// beta(x) in the p-simplex.
struct ChatteringStationaryPolicy {
  std::vector<DeterministicStationaryPolicy> selectors;
  /// weights[x][i] = beta_i(x)
  std::vector<std::vector<Rational>> weights;

  std::size_t order() const { return selectors.size(); }
};

/// Eventually stationary Markov policy: stages[t] for t < T, then tail forever.
struct MarkovPolicy {
  std::vector<StationaryPolicy> stages;
  StationaryPolicy tail;

  std::size_t horizon() const { return stages.size(); }
  const StationaryPolicy& at(std::size_t t) const { return t < stages.size() ? stages[t] : tail; }
};

class SupportTooLarge : public std::runtime_error {
 public:
  SupportTooLarge(std::size_t state, std::size_t support, std::size_t cap);
  std::size_t state;
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty string when the policy is admissible for spec, else a description.
std::string check_policy(const ModelSpec& spec, const StationaryPolicy& sigma);
std::string check_policy(const ModelSpec& spec, const DeterministicStationaryPolicy& phi);
std::string check_policy(const ModelSpec& spec, const ChatteringStationaryPolicy& gamma);

StationaryPolicy as_stationary(const DeterministicStationaryPolicy& phi, const ModelSpec& spec);
StationaryPolicy as_stationary(const ChatteringStationaryPolicy& gamma, const ModelSpec& spec);

/// Inverse of as_stationary: selector i at x picks the i-th supported action in
/// declared order (clamped to the last one). Order is the largest support size.
ChatteringStationaryPolicy pack_selectors(const StationaryPolicy& sigma, std::size_t order_cap);

/// Number of actions with positive probability at x.
std::size_t support_size(const StationaryPolicy& sigma, std::size_t x);
bool is_deterministic(const StationaryPolicy& sigma);

/// theta: the first admissible action at every state.
DeterministicStationaryPolicy first_action_policy(const ModelSpec& spec);
StationaryPolicy uniform_policy(const ModelSpec& spec);

/// All deterministic stationary policies, in lexicographic order of choices.
/// Delta states are fixed to their first action.
std::vector<DeterministicStationaryPolicy> enumerate_deterministic(const ModelSpec& spec);

/// B[x][y] = sum_a sigma(a|x) Q(y|x,a) over transient x, y (positions in
/// spec.transient_states()).
template <class T>
Matrix<T> kernel_under(const ModelSpec& spec, const StationaryPolicy& sigma) {
  const auto trans = spec.transient_states();
  Matrix<T> b(trans.size(), trans.size(), T(0));
  for (std::size_t i = 0; i < trans.size(); ++i) {
    const std::size_t x = trans[i];
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
      const Rational& w = sigma.dist[x][a];
      if (w.is_zero()) continue;
      for (std::size_t j = 0; j < trans.size(); ++j) {
        const Rational& q = spec.kernel[x][a][trans[j]];
        if (!q.is_zero()) b(i, j) += Arith<T>::from(w * q);
      }
    }
  }
  return b;
}

/// Policy JSON: {"type": "deterministic"|"stationary"|"chattering"|"markov", ...}.
/// Actions are referenced by id; weights are rational strings.
nlohmann::json policy_to_json(const ModelSpec& spec, const DeterministicStationaryPolicy& phi);
nlohmann::json policy_to_json(const ModelSpec& spec, const StationaryPolicy& sigma);
nlohmann::json policy_to_json(const ModelSpec& spec, const ChatteringStationaryPolicy& gamma);
nlohmann::json policy_to_json(const ModelSpec& spec, const MarkovPolicy& pi);

/// Reads any policy form. Non-Markov forms become a Markov policy with T = 0.
MarkovPolicy markov_from_json(const ModelSpec& spec, const nlohmann::json& doc);
StationaryPolicy stationary_from_json(const ModelSpec& spec, const nlohmann::json& doc);

}  // namespace absorbd
