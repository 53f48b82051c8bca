#pragma once

#include "absorbd/scalar.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace absorbd {

struct StationaryPolicy;

/// Malformed model input (bad JSON shape, unknown ids, unparsable numbers).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requires a model that passes validate().
class Unvalidated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requires a uniformly absorbing model.
class NotAbsorbing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state-action pair by index: state into ModelSpec::states, action into
/// ModelSpec::actions[state].
struct StateAction {
  std::size_t state = 0;
  std::size_t action = 0;
  friend bool operator==(const StateAction&, const StateAction&) = default;
  friend auto operator<=>(const StateAction&, const StateAction&) = default;
};

/// Finite control model with absorbing set Delta. Indices are positions in the
/// declared orders; all numbers are exact.
struct ModelSpec {
  std::vector<std::string> states;
  std::vector<bool> in_delta;
  std::vector<std::vector<std::string>> actions;
  /// kernel[x][a][y] = Q(y | x, a)
  std::vector<std::vector<std::vector<Rational>>> kernel;
  std::vector<Rational> eta;
  /// rewards[x][a][i] = r_i(x, a)
  std::vector<std::vector<std::vector<Rational>>> rewards;
  std::size_t d = 1;

  std::size_t num_states() const { return states.size(); }
  bool is_delta(std::size_t x) const { return in_delta[x]; }
  std::optional<std::size_t> state_index(const std::string& id) const;
  std::optional<std::size_t> action_index(std::size_t x, const std::string& id) const;

  /// Delta^c in declared order.
  std::vector<std::size_t> transient_states() const;
  /// Feasible pairs (x, a) with x outside Delta, ordered by state then action.
  /// This is the variable order of occupation measures and the characteristic LP.
  std::vector<StateAction> transient_pairs() const;
};

struct ValidationResult {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Structural checks: stochastic rows, Delta closed with zero reward, nonempty
/// action sets, d >= 1, eta a probability vector.
ValidationResult validate(const ModelSpec& spec);

/// Uniform absorption verdict with its certificate.
struct AbsorptionReport {
  bool uniformly_absorbing = false;
  /// max over reachable transient states of the worst-case survival w_t, t = 0..N
  std::vector<Rational> survival_profile;
  std::vector<std::size_t> reachable;
  /// Success certificate: w_{kT} <= rho^k.
  std::size_t period = 0;
  Rational rho = 0;
  /// Failure certificate: pairs whose rows stay inside Delta^c, closing a cycle.
  std::vector<StateAction> cycle;
};

/// Runs the max-over-actions survival recursion on states reachable from
/// supp(eta) and decides uniform absorption with a certificate either way.
/// Throws Unvalidated when validate() fails.
AbsorptionReport check_uniform_absorption(const ModelSpec& spec);

/// Restricts A(x) to the support of sigma(.|x). States outside Delta that
/// sigma never visits get the single action A(x)[0].
ModelSpec restrict_to_support(const ModelSpec& spec, const StationaryPolicy& sigma);

/// Model file I/O. Numbers are strings ("1/3", "0.5") or JSON integers.
ModelSpec model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const ModelSpec& spec);
ModelSpec load_model(const std::string& path);

/// Parses a JSON scalar (string or integer) into an exact rational.
Rational json_rational(const nlohmann::json& v);
nlohmann::json rational_json(const Rational& q);

}  // namespace absorbd
