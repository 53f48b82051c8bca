#pragma once

#include "absorbd/chattering.hpp"
#include "absorbd/model.hpp"
#include "absorbd/policy.hpp"
#include "absorbd/rng.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace absorbd {

struct GenConfig {
  std::uint64_t seed = 1;
  /// Transient state count range.
  std::size_t min_states = 2, max_states = 4;
  std::size_t min_actions = 1, max_actions = 3;
  std::size_t d = 1;
  std::size_t delta_size = 1;
  /// Every (x, a) sends at least this much mass straight into Delta.
  Rational escape_floor = Rational(1, 5);
  /// Kernel, eta and reward entries are multiples of 1/denominator.
  long long denominator = 6;
  long long reward_bound = 3;
};

/// Throws std::invalid_argument on empty ranges or a nonpositive floor.
void check_config(const GenConfig& cfg);

/// Deterministic in cfg. Validated and certified uniformly absorbing.
ModelSpec generate(const GenConfig& cfg);

/// Random policies; supports are drawn uniformly in [1, max_support].
StationaryPolicy random_stationary(const ModelSpec& spec, Rng& rng, std::size_t max_support = 0);
ChatteringStationaryPolicy random_chattering(const ModelSpec& spec, Rng& rng, std::size_t order);
MarkovPolicy random_markov(const ModelSpec& spec, Rng& rng, std::size_t horizon);

enum class Outcome { pass, fail, skip };

struct SuiteOutcome {
  Outcome outcome = Outcome::pass;
  std::string detail;
};

/// Suite names in run order.
const std::vector<std::string>& suite_names();

/// One exact check of the named suite on spec; rng drives the suite's own
/// random choices (policies, constraints, functionals).
SuiteOutcome run_suite(const std::string& name, const ModelSpec& spec, Rng& rng, std::size_t cap);

struct Counterexample {
  std::string suite;
  std::size_t trial = 0;
  std::string detail;
  nlohmann::json model;
};

struct SuiteTally {
  std::string name;
  std::size_t passed = 0, failed = 0, skipped = 0;
};

struct VerificationReport {
  std::size_t trials = 0;
  std::vector<SuiteTally> suites;
  std::vector<Counterexample> counterexamples;
  bool ok() const { return counterexamples.empty(); }
};

/// Trial i generates its instance from substream i of cfg.seed; the report is
/// a fold over trials in index order.
VerificationReport run_verification(const GenConfig& cfg, std::size_t trials, const std::vector<std::string>& suites = {},
                                   std::size_t cap = lp::kDefaultVertexCap);

nlohmann::json report_to_json(const VerificationReport& r);

/// Shows that a finite model can reach alpha with a chattering policy although
/// no deterministic stationary policy reaches it.
struct AtomlessDemo {
  std::vector<Rational> alpha;
  bool achievable = false;
  std::optional<MatchResult> witness;
  std::vector<std::vector<Rational>> deterministic_values;
  bool achieved_deterministically = false;
};

AtomlessDemo atomless_demo(const ModelSpec& spec, const std::vector<Rational>& alpha);
nlohmann::json atomless_demo_to_json(const ModelSpec& spec, const AtomlessDemo& demo);

}  // namespace absorbd
