#include "absorbd/model.hpp"

#include "absorbd/policy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace absorbd {

using nlohmann::json;

namespace {

const std::string kDeltaAction = "a_delta";

std::string pair_name(const ModelSpec& spec, std::size_t x, std::size_t a) {
  return "(" + spec.states[x] + ", " + spec.actions[x][a] + ")";
}

/// Transient states reachable from supp(eta) when any action may be chosen.
std::vector<std::size_t> reachable_transient(const ModelSpec& spec) {
  const std::size_t n = spec.num_states();
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t x = 0; x < n; ++x)
    if (!spec.is_delta(x) && spec.eta[x].sign() > 0) {
      seen[x] = true;
      queue.push_back(x);
    }
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    for (const auto& row : spec.kernel[x])
      for (std::size_t y = 0; y < n; ++y)
        if (!spec.is_delta(y) && !seen[y] && row[y].sign() > 0) {
          seen[y] = true;
          queue.push_back(y);
        }
  }
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < n; ++x)
    if (seen[x]) out.push_back(x);
  return out;
}

}  // namespace

std::optional<std::size_t> ModelSpec::state_index(const std::string& id) const {
  auto it = std::find(states.begin(), states.end(), id);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

std::optional<std::size_t> ModelSpec::action_index(std::size_t x, const std::string& id) const {
  const auto& acts = actions[x];
  auto it = std::find(acts.begin(), acts.end(), id);
  if (it == acts.end()) return std::nullopt;
  return static_cast<std::size_t>(it - acts.begin());
}

std::vector<std::size_t> ModelSpec::transient_states() const {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < states.size(); ++x)
    if (!in_delta[x]) out.push_back(x);
  return out;
}

std::vector<StateAction> ModelSpec::transient_pairs() const {
  std::vector<StateAction> out;
  for (std::size_t x = 0; x < states.size(); ++x) {
    if (in_delta[x]) continue;
    for (std::size_t a = 0; a < actions[x].size(); ++a) out.push_back({x, a});
  }
  return out;
}

ValidationResult validate(const ModelSpec& spec) {
  ValidationResult res;
  auto fail = [&](std::string msg) {
    res.ok = false;
    res.violations.push_back(std::move(msg));
  };
  const std::size_t n = spec.num_states();
  if (n == 0) fail("model has no states");
  if (spec.d < 1) fail("d must be at least 1");
  if (spec.in_delta.size() != n || spec.actions.size() != n || spec.kernel.size() != n ||
      spec.rewards.size() != n || spec.eta.size() != n) {
    fail("inconsistent dimensions");
    return res;
  }
  Rational eta_sum = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (spec.eta[x].sign() < 0) fail("eta negative at " + spec.states[x]);
    eta_sum += spec.eta[x];
  }
  if (eta_sum != 1) fail("eta sums to " + to_string(eta_sum) + ", not 1");

  for (std::size_t x = 0; x < n; ++x) {
    if (spec.actions[x].empty()) {
      fail("no admissible action at state " + spec.states[x]);
      continue;
    }
    if (spec.kernel[x].size() != spec.actions[x].size() || spec.rewards[x].size() != spec.actions[x].size()) {
      fail("inconsistent action dimensions at state " + spec.states[x]);
      continue;
    }
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
      const auto& row = spec.kernel[x][a];
      if (row.size() != n) {
        fail("kernel row has wrong length at " + pair_name(spec, x, a));
        continue;
      }
      Rational sum = 0;
      bool negative = false;
      for (const auto& q : row) {
        if (q.sign() < 0) negative = true;
        sum += q;
      }
      if (negative) fail("row has negative entry at " + pair_name(spec, x, a));
      if (sum != 1) fail("row not stochastic at " + pair_name(spec, x, a) + " (sums to " + to_string(sum) + ")");
      const auto& r = spec.rewards[x][a];
      if (r.size() != spec.d) fail("reward dimension mismatch at " + pair_name(spec, x, a));
      if (spec.is_delta(x)) {
        for (std::size_t y = 0; y < n; ++y)
          if (!spec.is_delta(y) && row[y].sign() != 0) {
            fail("row leaves delta at " + pair_name(spec, x, a));
            break;
          }
        if (std::any_of(r.begin(), r.end(), [](const Rational& v) { return !v.is_zero(); }))
          fail("reward nonzero on delta at " + pair_name(spec, x, a));
      }
    }
  }
  return res;
}

AbsorptionReport check_uniform_absorption(const ModelSpec& spec) {
  if (auto v = validate(spec); !v.ok) throw Unvalidated("model is invalid: " + v.violations.front());
  const std::size_t n = spec.num_states();
  AbsorptionReport rep;
  rep.reachable = reachable_transient(spec);
  const auto& reach = rep.reachable;
  const std::size_t horizon = reach.size();

  // w_0 = 1 on reachable transient states, 0 elsewhere (absorbed or never visited).
  std::vector<Rational> w(n, Rational(0));
  for (auto x : reach) w[x] = 1;
  auto max_over_reach = [&](const std::vector<Rational>& v) {
    Rational m = 0;
    for (auto x : reach) m = std::max(m, v[x]);
    return m;
  };
  rep.survival_profile.push_back(max_over_reach(w));
  std::optional<std::size_t> first_below;
  if (reach.empty()) first_below = 0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    std::vector<Rational> next(n, Rational(0));
    for (auto x : reach) {
      Rational best = 0;
      for (const auto& row : spec.kernel[x]) {
        Rational s = 0;
        for (auto y : reach)
          if (!row[y].is_zero()) s += row[y] * w[y];
        best = std::max(best, s);
      }
      next[x] = best;
    }
    w = std::move(next);
    rep.survival_profile.push_back(max_over_reach(w));
    if (!first_below && rep.survival_profile.back() < 1) first_below = t;
  }

  if (first_below) {
    rep.uniformly_absorbing = true;
    rep.period = std::max<std::size_t>(*first_below, 1);
    rep.rho = rep.period < rep.survival_profile.size() ? rep.survival_profile[rep.period] : Rational(0);
    return rep;
  }

  // Largest set S with an action per state whose row stays inside S: the
  // states of sure survival. Nonempty here because w_N = 1 somewhere.
  std::vector<bool> in_s(n, false);
  for (auto x : reach) in_s[x] = true;
  auto closed_action = [&](std::size_t x) -> std::optional<std::size_t> {
    for (std::size_t a = 0; a < spec.kernel[x].size(); ++a) {
      const auto& row = spec.kernel[x][a];
      bool inside = true;
      for (std::size_t y = 0; y < n && inside; ++y)
        if (row[y].sign() > 0 && !in_s[y]) inside = false;
      if (inside) return a;
    }
    return std::nullopt;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (auto x : reach)
      if (in_s[x] && !closed_action(x)) {
        in_s[x] = false;
        changed = true;
      }
  }
  std::size_t start = n;
  for (auto x : reach)
    if (in_s[x]) {
      start = x;
      break;
    }
  if (start == n) throw std::logic_error("survival recursion and closed-set search disagree");

  // Walk the closed actions until a state repeats; the repeated segment is the cycle.
  std::vector<StateAction> path;
  std::vector<std::ptrdiff_t> pos(n, -1);
  std::size_t x = start;
  while (pos[x] < 0) {
    pos[x] = static_cast<std::ptrdiff_t>(path.size());
    std::size_t a = *closed_action(x);
    path.push_back({x, a});
    const auto& row = spec.kernel[x][a];
    std::size_t y = 0;
    while (row[y].sign() <= 0) ++y;
    x = y;
  }
  rep.cycle.assign(path.begin() + pos[x], path.end());
  return rep;
}

ModelSpec restrict_to_support(const ModelSpec& spec, const StationaryPolicy& sigma) {
  if (auto v = validate(spec); !v.ok) throw Unvalidated("model is invalid: " + v.violations.front());
  if (auto err = check_policy(spec, sigma); !err.empty()) throw PolicyError(err);
  const std::size_t n = spec.num_states();

  // States visited under sigma before absorption.
  std::vector<bool> visited(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t x = 0; x < n; ++x)
    if (!spec.is_delta(x) && spec.eta[x].sign() > 0) {
      visited[x] = true;
      queue.push_back(x);
    }
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
      if (sigma.dist[x][a].sign() <= 0) continue;
      for (std::size_t y = 0; y < n; ++y)
        if (!spec.is_delta(y) && !visited[y] && spec.kernel[x][a][y].sign() > 0) {
          visited[y] = true;
          queue.push_back(y);
        }
    }
  }

  ModelSpec out = spec;
  for (std::size_t x = 0; x < n; ++x) {
    if (spec.is_delta(x)) continue;
    std::vector<std::size_t> keep;
    if (visited[x]) {
      for (std::size_t a = 0; a < spec.actions[x].size(); ++a)
        if (sigma.dist[x][a].sign() > 0) keep.push_back(a);
    } else {
      keep.push_back(0);
    }
    out.actions[x].clear();
    out.kernel[x].clear();
    out.rewards[x].clear();
    for (auto a : keep) {
      out.actions[x].push_back(spec.actions[x][a]);
      out.kernel[x].push_back(spec.kernel[x][a]);
      out.rewards[x].push_back(spec.rewards[x][a]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

Rational json_rational(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long long>());
  throw ModelError("expected a number string or integer, got " + v.dump());
}

json rational_json(const Rational& q) { return to_string(q); }

ModelSpec model_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw ModelError("model must be a JSON object");
    ModelSpec spec;
    for (const auto& s : doc.at("states")) spec.states.push_back(s.get<std::string>());
    const std::size_t n = spec.states.size();
    if (std::set<std::string>(spec.states.begin(), spec.states.end()).size() != n)
      throw ModelError("duplicate state ids");
    auto idx = [&](const json& id) {
      auto i = spec.state_index(id.get<std::string>());
      if (!i) throw ModelError("unknown state '" + id.get<std::string>() + "'");
      return *i;
    };
    spec.in_delta.assign(n, false);
    for (const auto& s : doc.at("delta")) spec.in_delta[idx(s)] = true;

    spec.actions.assign(n, {});
    const auto& acts = doc.at("actions");
    for (auto it = acts.begin(); it != acts.end(); ++it) {
      std::size_t x = idx(json(it.key()));
      for (const auto& a : it.value()) spec.actions[x].push_back(a.get<std::string>());
      std::set<std::string> uniq(spec.actions[x].begin(), spec.actions[x].end());
      if (uniq.size() != spec.actions[x].size()) throw ModelError("duplicate action ids at " + spec.states[x]);
    }

    long long d = 1;
    if (doc.contains("d"))
      d = doc.at("d").get<long long>();
    else if (doc.contains("rewards") && !doc.at("rewards").empty())
      d = static_cast<long long>(doc.at("rewards").front().at("r").size());
    spec.d = d < 0 ? 0 : static_cast<std::size_t>(d);

    // Delta states without declared actions get a self-loop with zero reward.
    std::vector<bool> synthetic(n, false);
    for (std::size_t x = 0; x < n; ++x)
      if (spec.in_delta[x] && spec.actions[x].empty()) {
        spec.actions[x].push_back(kDeltaAction);
        synthetic[x] = true;
      }

    spec.kernel.assign(n, {});
    spec.rewards.assign(n, {});
    for (std::size_t x = 0; x < n; ++x) {
      spec.kernel[x].assign(spec.actions[x].size(), std::vector<Rational>(n, Rational(0)));
      spec.rewards[x].assign(spec.actions[x].size(), std::vector<Rational>(spec.d, Rational(0)));
      if (synthetic[x]) spec.kernel[x][0][x] = 1;
    }

    std::set<StateAction> seen_rows, seen_rewards;
    auto pair_of = [&](const json& entry) {
      std::size_t x = idx(entry.at("x"));
      auto a = spec.action_index(x, entry.at("a").get<std::string>());
      if (!a) throw ModelError("unknown action '" + entry.at("a").get<std::string>() + "' at " + spec.states[x]);
      return StateAction{x, *a};
    };
    for (const auto& entry : doc.at("kernel")) {
      auto sa = pair_of(entry);
      if (!seen_rows.insert(sa).second) throw ModelError("duplicate kernel row " + pair_name(spec, sa.state, sa.action));
      const auto& to = entry.at("to");
      for (auto it = to.begin(); it != to.end(); ++it) spec.kernel[sa.state][sa.action][idx(json(it.key()))] = json_rational(it.value());
    }
    if (doc.contains("rewards")) {
      for (const auto& entry : doc.at("rewards")) {
        auto sa = pair_of(entry);
        if (!seen_rewards.insert(sa).second) throw ModelError("duplicate reward " + pair_name(spec, sa.state, sa.action));
        auto& r = spec.rewards[sa.state][sa.action];
        r.clear();
        for (const auto& v : entry.at("r")) r.push_back(json_rational(v));
      }
    }

    spec.eta.assign(n, Rational(0));
    const auto& eta = doc.at("eta");
    if (eta.is_object()) {
      for (auto it = eta.begin(); it != eta.end(); ++it) spec.eta[idx(json(it.key()))] = json_rational(it.value());
    } else if (eta.is_array()) {
      if (eta.size() != n) throw ModelError("eta array length differs from state count");
      for (std::size_t x = 0; x < n; ++x) spec.eta[x] = json_rational(eta[x]);
    } else {
      throw ModelError("eta must be an object or an array");
    }
    return spec;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model: ") + e.what());
  } catch (const ParseError& e) {
    throw ModelError(std::string("malformed number: ") + e.what());
  }
}

json model_to_json(const ModelSpec& spec) {
  json doc;
  doc["states"] = spec.states;
  json delta = json::array();
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (spec.is_delta(x)) delta.push_back(spec.states[x]);
  doc["delta"] = delta;
  json acts = json::object();
  for (std::size_t x = 0; x < spec.num_states(); ++x) acts[spec.states[x]] = spec.actions[x];
  doc["actions"] = acts;
  json kernel = json::array(), rewards = json::array();
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
      json to = json::object();
      for (std::size_t y = 0; y < spec.num_states(); ++y)
        if (!spec.kernel[x][a][y].is_zero()) to[spec.states[y]] = rational_json(spec.kernel[x][a][y]);
      kernel.push_back({{"x", spec.states[x]}, {"a", spec.actions[x][a]}, {"to", to}});
      json r = json::array();
      for (const auto& v : spec.rewards[x][a]) r.push_back(rational_json(v));
      rewards.push_back({{"x", spec.states[x]}, {"a", spec.actions[x][a]}, {"r", r}});
    }
  doc["kernel"] = kernel;
  doc["rewards"] = rewards;
  json eta = json::object();
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (!spec.eta[x].is_zero()) eta[spec.states[x]] = rational_json(spec.eta[x]);
  doc["eta"] = eta;
  doc["d"] = spec.d;
  return doc;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed JSON in '") + path + "': " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace absorbd
