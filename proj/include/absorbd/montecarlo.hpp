#pragma once

#include "absorbd/model.hpp"
#include "absorbd/policy.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace absorbd {

struct SimConfig {
  std::uint64_t seed = 0;
  std::size_t episodes = 1;
  /// Steps per episode before the run is cut off and counted as a cap hit.
  std::size_t horizon_cap = 1'000'000;
};

/// History-dependent policy: given the pairs visited so far, the current state
/// and a uniform draw in [0, 1), returns an action index at that state.
using HistoryPolicy = std::function<std::size_t(std::span<const StateAction> history, std::size_t state, double u)>;

/// Inverse-CDF sampler of a Markov policy (covers every stationary form).
HistoryPolicy history_policy(const ModelSpec& spec, const MarkovPolicy& pi);

struct SimResult {
  std::size_t episodes = 0;
  /// Per transient pair, in transient_pairs() order.
  std::vector<double> occupation, occupation_se;
  std::vector<double> performance, performance_se;
  double mean_time = 0, time_se = 0;
  std::vector<std::uint64_t> time_samples;
  std::size_t horizon_cap_hits = 0;
};

/// Episode i draws from its own mt19937_64 stream seeded by
/// splitmix64(seed, i), so results do not depend on scheduling.
SimResult simulate(const ModelSpec& spec, const HistoryPolicy& policy, const SimConfig& cfg);
SimResult simulate(const ModelSpec& spec, const MarkovPolicy& pi, const SimConfig& cfg);

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode);

nlohmann::json sim_result_to_json(const ModelSpec& spec, const SimResult& r);

}  // namespace absorbd
