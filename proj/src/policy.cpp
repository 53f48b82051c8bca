#include "absorbd/policy.hpp"

#include <algorithm>

namespace absorbd {

using nlohmann::json;

SupportTooLarge::SupportTooLarge(std::size_t x, std::size_t support, std::size_t cap)
    : std::runtime_error("support of size " + std::to_string(support) + " at state index " + std::to_string(x) +
                         " exceeds order cap " + std::to_string(cap)),
      state(x) {}

std::string check_policy(const ModelSpec& spec, const StationaryPolicy& sigma) {
  if (sigma.dist.size() != spec.num_states()) return "policy covers " + std::to_string(sigma.dist.size()) + " states";
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    const auto& p = sigma.dist[x];
    if (p.size() != spec.actions[x].size()) return "policy has wrong action count at " + spec.states[x];
    Rational s = 0;
    for (const auto& v : p) {
      if (v.sign() < 0) return "negative probability at " + spec.states[x];
      s += v;
    }
    if (s != 1) return "distribution at " + spec.states[x] + " sums to " + to_string(s);
  }
  return {};
}

std::string check_policy(const ModelSpec& spec, const DeterministicStationaryPolicy& phi) {
  if (phi.choice.size() != spec.num_states()) return "selector covers " + std::to_string(phi.choice.size()) + " states";
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (phi.choice[x] >= spec.actions[x].size()) return "inadmissible action at " + spec.states[x];
  return {};
}

std::string check_policy(const ModelSpec& spec, const ChatteringStationaryPolicy& gamma) {
  if (gamma.order() == 0) return "chattering policy has order 0";
  for (const auto& phi : gamma.selectors)
    if (auto e = check_policy(spec, phi); !e.empty()) return e;
  if (gamma.weights.size() != spec.num_states()) return "weights cover wrong number of states";
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    if (gamma.weights[x].size() != gamma.order()) return "weight vector has wrong length at " + spec.states[x];
    Rational s = 0;
    for (const auto& b : gamma.weights[x]) {
      if (b.sign() < 0) return "negative weight at " + spec.states[x];
      s += b;
    }
    if (s != 1) return "weights at " + spec.states[x] + " sum to " + to_string(s);
  }
  return {};
}

StationaryPolicy as_stationary(const DeterministicStationaryPolicy& phi, const ModelSpec& spec) {
  StationaryPolicy s;
  s.dist.resize(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    s.dist[x].assign(spec.actions[x].size(), Rational(0));
    s.dist[x][phi.choice[x]] = 1;
  }
  return s;
}

StationaryPolicy as_stationary(const ChatteringStationaryPolicy& gamma, const ModelSpec& spec) {
  StationaryPolicy s;
  s.dist.resize(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    s.dist[x].assign(spec.actions[x].size(), Rational(0));
    for (std::size_t i = 0; i < gamma.order(); ++i) s.dist[x][gamma.selectors[i].choice[x]] += gamma.weights[x][i];
  }
  return s;
}

std::size_t support_size(const StationaryPolicy& sigma, std::size_t x) {
  return static_cast<std::size_t>(
      std::count_if(sigma.dist[x].begin(), sigma.dist[x].end(), [](const Rational& v) { return v.sign() > 0; }));
}

bool is_deterministic(const StationaryPolicy& sigma) {
  for (std::size_t x = 0; x < sigma.dist.size(); ++x)
    if (support_size(sigma, x) != 1) return false;
  return true;
}

ChatteringStationaryPolicy pack_selectors(const StationaryPolicy& sigma, std::size_t order_cap) {
  const std::size_t n = sigma.dist.size();
  std::vector<std::vector<std::size_t>> supp(n);
  std::size_t order = 1;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t a = 0; a < sigma.dist[x].size(); ++a)
      if (sigma.dist[x][a].sign() > 0) supp[x].push_back(a);
    if (supp[x].size() > order_cap) throw SupportTooLarge(x, supp[x].size(), order_cap);
    order = std::max(order, supp[x].size());
  }
  ChatteringStationaryPolicy g;
  g.selectors.assign(order, DeterministicStationaryPolicy{std::vector<std::size_t>(n, 0)});
  g.weights.assign(n, std::vector<Rational>(order, Rational(0)));
  for (std::size_t x = 0; x < n; ++x) {
    if (supp[x].empty()) throw PolicyError("empty support at state index " + std::to_string(x));
    for (std::size_t i = 0; i < order; ++i) {
      const std::size_t k = std::min(i, supp[x].size() - 1);
      g.selectors[i].choice[x] = supp[x][k];
      if (i < supp[x].size()) g.weights[x][i] = sigma.dist[x][supp[x][i]];
    }
  }
  return g;
}

DeterministicStationaryPolicy first_action_policy(const ModelSpec& spec) {
  return {std::vector<std::size_t>(spec.num_states(), 0)};
}

StationaryPolicy uniform_policy(const ModelSpec& spec) {
  StationaryPolicy s;
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    const auto k = static_cast<long>(spec.actions[x].size());
    s.dist.emplace_back(spec.actions[x].size(), Rational(1, k));
  }
  return s;
}

std::vector<DeterministicStationaryPolicy> enumerate_deterministic(const ModelSpec& spec) {
  const auto trans = spec.transient_states();
  std::vector<DeterministicStationaryPolicy> out;
  DeterministicStationaryPolicy phi = first_action_policy(spec);
  while (true) {
    out.push_back(phi);
    // Odometer over transient states, last state fastest.
    std::size_t k = trans.size();
    while (k > 0) {
      const std::size_t x = trans[k - 1];
      if (++phi.choice[x] < spec.actions[x].size()) break;
      phi.choice[x] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json dist_json(const ModelSpec& spec, const StationaryPolicy& sigma) {
  json dist = json::object();
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    json row = json::object();
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a)
      if (!sigma.dist[x][a].is_zero()) row[spec.actions[x][a]] = rational_json(sigma.dist[x][a]);
    dist[spec.states[x]] = row;
  }
  return dist;
}

json choice_json(const ModelSpec& spec, const DeterministicStationaryPolicy& phi) {
  json c = json::object();
  for (std::size_t x = 0; x < spec.num_states(); ++x) c[spec.states[x]] = spec.actions[x][phi.choice[x]];
  return c;
}

std::size_t state_of(const ModelSpec& spec, const std::string& id) {
  auto x = spec.state_index(id);
  if (!x) throw PolicyError("policy references unknown state '" + id + "'");
  return *x;
}

std::size_t action_of(const ModelSpec& spec, std::size_t x, const std::string& id) {
  auto a = spec.action_index(x, id);
  if (!a) throw PolicyError("policy references unknown action '" + id + "' at " + spec.states[x]);
  return *a;
}

/// Fills states the document omits: Delta states take their first action,
/// transient states are an error.
void require_cover(const ModelSpec& spec, const std::vector<bool>& given) {
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (!given[x] && !spec.is_delta(x)) throw PolicyError("policy omits state " + spec.states[x]);
}

DeterministicStationaryPolicy deterministic_from(const ModelSpec& spec, const json& choice) {
  DeterministicStationaryPolicy phi = first_action_policy(spec);
  std::vector<bool> given(spec.num_states(), false);
  for (auto it = choice.begin(); it != choice.end(); ++it) {
    auto x = state_of(spec, it.key());
    phi.choice[x] = action_of(spec, x, it.value().get<std::string>());
    given[x] = true;
  }
  require_cover(spec, given);
  return phi;
}

StationaryPolicy stationary_from_dist(const ModelSpec& spec, const json& dist) {
  StationaryPolicy s = as_stationary(first_action_policy(spec), spec);
  std::vector<bool> given(spec.num_states(), false);
  for (auto it = dist.begin(); it != dist.end(); ++it) {
    auto x = state_of(spec, it.key());
    s.dist[x].assign(spec.actions[x].size(), Rational(0));
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
      s.dist[x][action_of(spec, x, jt.key())] = json_rational(jt.value());
    given[x] = true;
  }
  require_cover(spec, given);
  return s;
}

ChatteringStationaryPolicy chattering_from(const ModelSpec& spec, const json& doc) {
  ChatteringStationaryPolicy g;
  for (const auto& sel : doc.at("selectors")) g.selectors.push_back(deterministic_from(spec, sel));
  const std::size_t p = g.selectors.size();
  if (p == 0) throw PolicyError("chattering policy needs at least one selector");
  std::vector<Rational> first(p, Rational(0));
  first[0] = 1;
  g.weights.assign(spec.num_states(), first);
  std::vector<bool> given(spec.num_states(), false);
  const auto& w = doc.at("weights");
  for (auto it = w.begin(); it != w.end(); ++it) {
    auto x = state_of(spec, it.key());
    if (it.value().size() != p) throw PolicyError("weight vector length differs from order at " + spec.states[x]);
    for (std::size_t i = 0; i < p; ++i) g.weights[x][i] = json_rational(it.value()[i]);
    given[x] = true;
  }
  require_cover(spec, given);
  return g;
}

StationaryPolicy any_stationary(const ModelSpec& spec, const json& doc) {
  const auto type = doc.at("type").get<std::string>();
  StationaryPolicy s;
  if (type == "deterministic")
    s = as_stationary(deterministic_from(spec, doc.at("choice")), spec);
  else if (type == "stationary")
    s = stationary_from_dist(spec, doc.at("dist"));
  else if (type == "chattering") {
    auto g = chattering_from(spec, doc);
    if (auto e = check_policy(spec, g); !e.empty()) throw PolicyError(e);
    s = as_stationary(g, spec);
  } else
    throw PolicyError("expected a stationary policy form, got type '" + type + "'");
  if (auto e = check_policy(spec, s); !e.empty()) throw PolicyError(e);
  return s;
}

}  // namespace

json policy_to_json(const ModelSpec& spec, const DeterministicStationaryPolicy& phi) {
  return {{"type", "deterministic"}, {"choice", choice_json(spec, phi)}};
}

json policy_to_json(const ModelSpec& spec, const StationaryPolicy& sigma) {
  return {{"type", "stationary"}, {"dist", dist_json(spec, sigma)}};
}

json policy_to_json(const ModelSpec& spec, const ChatteringStationaryPolicy& gamma) {
  json sel = json::array();
  for (const auto& phi : gamma.selectors) sel.push_back(choice_json(spec, phi));
  json w = json::object();
  for (std::size_t x = 0; x < spec.num_states(); ++x) {
    json row = json::array();
    for (const auto& b : gamma.weights[x]) row.push_back(rational_json(b));
    w[spec.states[x]] = row;
  }
  return {{"type", "chattering"}, {"order", gamma.order()}, {"selectors", sel}, {"weights", w}};
}

json policy_to_json(const ModelSpec& spec, const MarkovPolicy& pi) {
  json stages = json::array();
  for (const auto& s : pi.stages) stages.push_back(policy_to_json(spec, s));
  return {{"type", "markov"}, {"stages", stages}, {"tail", policy_to_json(spec, pi.tail)}};
}

MarkovPolicy markov_from_json(const ModelSpec& spec, const json& doc) {
  try {
    if (doc.at("type").get<std::string>() != "markov") return MarkovPolicy{{}, any_stationary(spec, doc)};
    MarkovPolicy pi;
    for (const auto& st : doc.at("stages")) pi.stages.push_back(any_stationary(spec, st));
    pi.tail = any_stationary(spec, doc.at("tail"));
    return pi;
  } catch (const json::exception& e) {
    throw PolicyError(std::string("malformed policy: ") + e.what());
  } catch (const ParseError& e) {
    throw PolicyError(std::string("malformed number in policy: ") + e.what());
  } catch (const ModelError& e) {
    throw PolicyError(e.what());
  }
}

StationaryPolicy stationary_from_json(const ModelSpec& spec, const json& doc) {
  auto pi = markov_from_json(spec, doc);
  if (pi.horizon() != 0) throw PolicyError("expected a stationary policy, got a Markov policy with stages");
  return pi.tail;
}

}  // namespace absorbd
