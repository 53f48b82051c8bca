#include "absorbd/montecarlo.hpp"
#include "absorbd/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace absorbd {

using nlohmann::json;

namespace {

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::vector<double> cumulative(const std::vector<Rational>& p) {
  std::vector<double> c;
  Rational run = 0;
  for (const auto& q : p) {
    run += q;
    c.push_back(static_cast<double>(run));
  }
  return c;
}

// First index whose cumulative weight exceeds u; zero-probability entries are
// never chosen because their cumulative value equals the previous one.
std::size_t pick(const std::vector<double>& cdf, double u) {
  for (std::size_t i = 0; i < cdf.size(); ++i)
    if (u < cdf[i]) return i;
  for (std::size_t i = cdf.size(); i-- > 0;)
    if (i == 0 || cdf[i] > cdf[i - 1]) return i;
  return 0;
}

struct Welford {
  std::size_t n = 0;
  double mean = 0, m2 = 0;
  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  double se() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0; }
};

}  // namespace

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode) { return substream_seed(seed, episode); }

HistoryPolicy history_policy(const ModelSpec& spec, const MarkovPolicy& pi) {
  if (auto err = check_policy(spec, pi.tail); !err.empty()) throw PolicyError(err);
  std::vector<std::vector<std::vector<double>>> stages;
  for (std::size_t t = 0; t <= pi.horizon(); ++t) {
    const auto& s = pi.at(t);
    if (auto err = check_policy(spec, s); !err.empty()) throw PolicyError("stage " + std::to_string(t) + ": " + err);
    std::vector<std::vector<double>> per_state;
    for (const auto& row : s.dist) per_state.push_back(cumulative(row));
    stages.push_back(std::move(per_state));
  }
  return [stages = std::move(stages)](std::span<const StateAction> history, std::size_t x, double u) {
    const std::size_t t = std::min(history.size(), stages.size() - 1);
    return pick(stages[t][x], u);
  };
}

SimResult simulate(const ModelSpec& spec, const HistoryPolicy& policy, const SimConfig& cfg) {
  if (cfg.episodes == 0) throw std::invalid_argument("episodes must be at least 1");
  const auto pairs = spec.transient_pairs();
  std::vector<std::vector<std::size_t>> pos(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x) pos[x].assign(spec.actions[x].size(), 0);
  for (std::size_t k = 0; k < pairs.size(); ++k) pos[pairs[k].state][pairs[k].action] = k;

  const auto eta_cdf = cumulative(spec.eta);
  std::vector<std::vector<std::vector<double>>> kernel_cdf(spec.num_states());
  std::vector<std::vector<std::vector<double>>> reward(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
      kernel_cdf[x].push_back(cumulative(spec.kernel[x][a]));
      reward[x].push_back(convert_vector<double>(spec.rewards[x][a]));
    }

  SimResult res;
  res.episodes = cfg.episodes;
  std::vector<Welford> occ(pairs.size()), perf(spec.d);
  Welford time;
  std::vector<double> visits(pairs.size());
  std::vector<double> total(spec.d);
  std::vector<StateAction> history;

  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    std::mt19937_64 gen(episode_seed(cfg.seed, e));
    std::fill(visits.begin(), visits.end(), 0.0);
    std::fill(total.begin(), total.end(), 0.0);
    history.clear();
    std::size_t x = pick(eta_cdf, uniform01(gen));
    std::uint64_t steps = 0;
    while (!spec.is_delta(x)) {
      if (steps == cfg.horizon_cap) {
        ++res.horizon_cap_hits;
        break;
      }
      const std::size_t a = policy(history, x, uniform01(gen));
      if (a >= spec.actions[x].size()) throw PolicyError("history policy chose an invalid action at " + spec.states[x]);
      visits[pos[x][a]] += 1;
      for (std::size_t i = 0; i < spec.d; ++i) total[i] += reward[x][a][i];
      history.push_back({x, a});
      x = pick(kernel_cdf[x][a], uniform01(gen));
      ++steps;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) occ[k].add(visits[k]);
    for (std::size_t i = 0; i < spec.d; ++i) perf[i].add(total[i]);
    time.add(static_cast<double>(steps));
    res.time_samples.push_back(steps);
  }

  for (const auto& w : occ) {
    res.occupation.push_back(w.mean);
    res.occupation_se.push_back(w.se());
  }
  for (const auto& w : perf) {
    res.performance.push_back(w.mean);
    res.performance_se.push_back(w.se());
  }
  res.mean_time = time.mean;
  res.time_se = time.se();
  return res;
}

SimResult simulate(const ModelSpec& spec, const MarkovPolicy& pi, const SimConfig& cfg) {
  return simulate(spec, history_policy(spec, pi), cfg);
}

json sim_result_to_json(const ModelSpec& spec, const SimResult& r) {
  const auto pairs = spec.transient_pairs();
  json occ = json::array();
  for (std::size_t k = 0; k < pairs.size(); ++k)
    occ.push_back({{"x", spec.states[pairs[k].state]},
                   {"a", spec.actions[pairs[k].state][pairs[k].action]},
                   {"mean", r.occupation[k]},
                   {"se", r.occupation_se[k]}});
  std::uint64_t longest = 0;
  for (auto t : r.time_samples) longest = std::max(longest, t);
  return {{"episodes", r.episodes},
          {"occupation", occ},
          {"performance", r.performance},
          {"performance_se", r.performance_se},
          {"absorption_time", {{"mean", r.mean_time}, {"se", r.time_se}, {"max", longest}}},
          {"horizon_cap_hits", r.horizon_cap_hits}};
}

}  // namespace absorbd
