#include "absorbd/cli.hpp"

#include "absorbd/chattering.hpp"
#include "absorbd/errors.hpp"
#include "absorbd/geometry.hpp"
#include "absorbd/harness.hpp"
#include "absorbd/montecarlo.hpp"
#include "absorbd/simd/kernels.hpp"
#include "absorbd/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>

namespace absorbd::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{usage, "usage", msg}; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{invalid, "io", "cannot open " + path};
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Failure{invalid, "invalid_input", path + ": " + e.what()};
  }
}

ModelSpec read_model(const std::string& path) { return model_from_json(read_json(path)); }

// Accepts a bare policy document, an object with a "policy" key, or a report
// produced by another command.
json policy_doc(json doc) {
  if (doc.contains("result")) doc = doc.at("result");
  if (!doc.contains("type") && doc.contains("policy")) doc = doc.at("policy");
  return doc;
}

std::vector<Rational> parse_vector(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') usage_error("unterminated vector '" + text + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<Rational> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty() && item.front() == '"' && item.back() == '"' && item.size() >= 2) item = item.substr(1, item.size() - 2);
    try {
      out.push_back(parse_rational(item));
    } catch (const ParseError&) {
      usage_error("bad number '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

// Pair table from a file: [{"x": id, "a": id, "g": [..]}, ...]; unlisted pairs are zero.
PairTable read_table(const ModelSpec& spec, const std::string& path, std::size_t& width) {
  const auto doc = read_json(path);
  const json& rows = doc.is_object() && doc.contains("g") ? doc.at("g") : doc;
  if (!rows.is_array() || rows.empty()) throw Failure{invalid, "invalid_input", path + ": expected a nonempty list of {x, a, g}"};
  try {
    width = rows.front().at("g").size();
    PairTable g(spec.num_states());
    for (std::size_t x = 0; x < spec.num_states(); ++x) g[x].assign(spec.actions[x].size(), std::vector<Rational>(width, Rational(0)));
    for (const auto& r : rows) {
      const auto x = spec.state_index(r.at("x").get<std::string>());
      if (!x) throw Failure{invalid, "invalid_input", path + ": unknown state " + r.at("x").dump()};
      const auto a = spec.action_index(*x, r.at("a").get<std::string>());
      if (!a) throw Failure{invalid, "invalid_input", path + ": unknown action " + r.at("a").dump()};
      if (r.at("g").size() != width) throw Failure{invalid, "invalid_input", path + ": rows of different width"};
      for (std::size_t i = 0; i < width; ++i) g[*x][*a][i] = json_rational(r.at("g")[i]);
    }
    return g;
  } catch (const json::exception& e) {
    throw Failure{invalid, "invalid_input", path + ": " + e.what()};
  }
}

std::vector<CriterionConstraint> parse_constraints(const ModelSpec& spec, const std::vector<std::string>& texts) {
  static const std::regex re(R"(^\s*(.+?)\s*(<=|>=|=)\s*(.+?)\s*$)");
  std::vector<CriterionConstraint> out;
  for (const auto& t : texts) {
    std::smatch m;
    if (!std::regex_match(t, m, re)) usage_error("constraint '" + t + "' is not of the form lhs{=,<=,>=}level");
    const std::string lhs = m[1];
    const Relation rel = m[2] == "=" ? Relation::equal : m[2] == "<=" ? Relation::less_equal : Relation::greater_equal;
    const auto levels = parse_vector(m[3]);
    if (lhs == "mass" || std::regex_match(lhs, std::regex(R"(r\d+)"))) {
      if (levels.size() != 1) usage_error("constraint '" + t + "' needs one level");
      if (lhs == "mass") {
        out.push_back(mass_criterion(spec, rel, levels[0]));
      } else {
        const auto i = std::stoul(lhs.substr(1));
        if (i >= spec.d) throw Failure{invalid, "invalid_input", "criterion " + lhs + " does not exist (d = " + std::to_string(spec.d) + ")"};
        out.push_back(reward_criterion(spec, i, rel, levels[0]));
      }
      continue;
    }
    std::size_t width = 0;
    const auto g = read_table(spec, lhs, width);
    if (levels.size() != width) usage_error("constraint '" + t + "' gives " + std::to_string(levels.size()) + " levels for width " + std::to_string(width));
    for (std::size_t i = 0; i < width; ++i) {
      PairTable col(spec.num_states());
      for (std::size_t x = 0; x < spec.num_states(); ++x)
        for (const auto& row : g[x]) col[x].push_back({row[i]});
      out.push_back({width == 1 ? lhs : lhs + "[" + std::to_string(i) + "]", std::move(col), rel, levels[i]});
    }
  }
  return out;
}

json strings(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& q : v) a.push_back(to_string(q));
  return a;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t env_cap(std::size_t fallback) {
  if (const char* v = std::getenv("ABSORBD_VERTEX_CAP")) {
    char* end = nullptr;
    const unsigned long long n = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0' || n == 0) usage_error("ABSORBD_VERTEX_CAP must be a positive integer");
    return n;
  }
  return fallback;
}

struct Options {
  std::string mode = "exact";
  double eps = kDefaultEps;
  std::size_t cap = 0;
};

struct Args {
  std::string model;
  std::string policy;
  std::vector<std::string> constraints;
  std::vector<std::string> targets;
  std::string target;
  std::string objective;
  bool minimize = false;
  std::size_t stage = 0;
  std::size_t episodes = 10000;
  std::uint64_t seed = 0;
  std::size_t horizon_cap = 1'000'000;
  std::size_t trials = 50;
  std::vector<std::string> suites;
  GenConfig gen;
  std::string escape_floor = "1/5";
  std::string counterexample_dir;
  std::string demo_model;
  std::string demo_alpha = "[14/15]";
};

void require_exact(const Options& o, const std::string& cmd) {
  if (o.mode != "exact") usage_error(cmd + " runs in exact mode only");
}

json cmd_validate(const Args& a, int& code) {
  const auto spec = read_model(a.model);
  const auto v = validate(spec);
  if (!v.ok) code = invalid;
  return {{"ok", v.ok}, {"violations", v.violations}, {"states", spec.num_states()}, {"d", spec.d}};
}

json cmd_absorb_check(const Args& a, int& code) {
  const auto spec = read_model(a.model);
  const auto r = check_uniform_absorption(spec);
  if (!r.uniformly_absorbing) code = invalid;
  json reach = json::array();
  for (auto x : r.reachable) reach.push_back(spec.states[x]);
  json out = {{"uniformly_absorbing", r.uniformly_absorbing}, {"survival_profile", strings(r.survival_profile)}, {"reachable", reach}};
  if (r.uniformly_absorbing) {
    out["certificate"] = {{"period", r.period}, {"rho", to_string(r.rho)}};
  } else {
    json cyc = json::array();
    for (const auto& sa : r.cycle) cyc.push_back({{"x", spec.states[sa.state]}, {"a", spec.actions[sa.state][sa.action]}});
    out["cycle"] = cyc;
  }
  return out;
}

json cmd_occmeasure(const Args& a, const Options& o) {
  const auto spec = read_model(a.model);
  const auto pi = markov_from_json(spec, policy_doc(read_json(a.policy)));
  if (o.mode == "float") {
    const Arith<double> ar{o.eps};
    return measure_to_json(spec, occupation_of_markov<double>(spec, pi, AbsorptionCheck::verify, ar));
  }
  return measure_to_json(spec, occupation_of_markov<Rational>(spec, pi));
}

ProblemSpec problem_of(const ModelSpec& spec, const Args& a) {
  ProblemSpec p{spec, {}, parse_constraints(spec, a.constraints), a.minimize ? lp::Goal::minimize : lp::Goal::maximize};
  if (a.objective.empty())
    p.objective.assign(spec.d, Rational(1));
  else
    p.objective = parse_vector(a.objective);
  return p;
}

json cmd_vertices(const Args& a, std::size_t cap) {
  const auto spec = read_model(a.model);
  auto problem = problem_of(spec, a);
  problem.objective.assign(spec.d, Rational(0));
  detail::require_absorbing(spec, AbsorptionCheck::verify);
  const auto np = spec.transient_pairs().size();
  json list = json::array();
  if (problem.constraints.empty()) {
    for (const auto& e : extreme_occupations(spec, cap))
      list.push_back({{"occupation", measure_to_json(spec, e.measure)}, {"policy", policy_to_json(spec, e.policy)}});
    return {{"count", list.size()}, {"vertices", list}};
  }
  for (const auto& v : lp::enumerate_vertices(problem_lp(problem), cap)) {
    const auto mu = measure_from_values(spec, std::span<const Rational>(v.values).first(np));
    std::size_t rows = 0;
    for (const auto& c : problem.constraints)
      if (c.relation == Relation::equal || integrate(mu, c.g, 1)[0] == c.level) ++rows;
    const auto gamma = vertex_to_chattering(spec, mu.mass, rows);
    list.push_back({{"occupation", measure_to_json(spec, mu)}, {"order_bound", rows}, {"policy", policy_to_json(spec, gamma)}});
  }
  return {{"count", list.size()}, {"vertices", list}};
}

json cmd_image(const Args& a, std::size_t cap) {
  const auto spec = read_model(a.model);
  std::vector<std::vector<Rational>> targets;
  for (const auto& t : a.targets) {
    targets.push_back(parse_vector(t));
    if (targets.back().size() != spec.d) usage_error("target '" + t + "' has the wrong dimension");
  }
  const auto rep = image_report(problem_of(spec, a), targets, cap);
  json flags = json::array();
  for (const auto& f : rep.targets)
    flags.push_back({{"target", strings(f.target)}, {"member", f.member}, {"relative_interior", f.relative_interior}});
  return {{"image", vpolytope_to_json(rep.image)}, {"targets", flags}};
}

json cmd_match(const Args& a) {
  const auto spec = read_model(a.model);
  const auto target = parse_vector(a.target);
  if (target.size() != spec.d) usage_error("target has " + std::to_string(target.size()) + " entries, model has d = " + std::to_string(spec.d));
  const auto m = match_performance(spec, target);
  return {{"policy", policy_to_json(spec, m.policy)},
          {"verification", {{"performance", strings(m.performance)}, {"order", m.policy.order()}, {"residual", strings(m.residual)}}}};
}

json cmd_solve(const Args& a, const Options& o) {
  const auto spec = read_model(a.model);
  const auto problem = problem_of(spec, a);
  if (o.mode == "float") return solve_result_to_json(spec, solve_constrained_float(problem, Arith<double>{o.eps}), problem);
  return solve_result_to_json(spec, solve_constrained(problem), problem);
}

json cmd_reduce_stage(const Args& a) {
  const auto spec = read_model(a.model);
  const auto pi = markov_from_json(spec, policy_doc(read_json(a.policy)));
  const auto r = stage_reduce(spec, pi, a.stage);
  return {{"stage", r.stage},
          {"max_support", r.max_support},
          {"support_bound", 2 * spec.d + 1},
          {"policy", policy_to_json(spec, r.policy)},
          {"stage_split_reward", {{"before", strings(r.split_reward_before)}, {"after", strings(r.split_reward_after)}}},
          {"split_preserved", r.split_preserved},
          {"performance", {{"before", strings(r.total_before)}, {"after", strings(r.total_after)}}}};
}

json cmd_simulate(const Args& a, const Options& o) {
  const auto spec = read_model(a.model);
  const auto pi = markov_from_json(spec, policy_doc(read_json(a.policy)));
  const auto report = check_uniform_absorption(spec);
  auto out = sim_result_to_json(spec, simulate(spec, pi, {a.seed, a.episodes, a.horizon_cap}));
  out["seed"] = a.seed;
  out["uniformly_absorbing"] = report.uniformly_absorbing;
  (void)o;
  return out;
}

json cmd_verify(Args a, std::size_t cap, int& code) {
  try {
    a.gen.escape_floor = parse_rational(a.escape_floor);
  } catch (const ParseError&) {
    usage_error("bad escape floor '" + a.escape_floor + "'");
  }
  a.gen.seed = a.seed;
  try {
    check_config(a.gen);
  } catch (const std::invalid_argument& e) {
    usage_error(e.what());
  }
  const auto rep = run_verification(a.gen, a.trials, a.suites, cap);
  auto out = report_to_json(rep);
  if (!a.counterexample_dir.empty() && !rep.counterexamples.empty()) {
    std::filesystem::create_directories(a.counterexample_dir);
    json files = json::array();
    for (const auto& c : rep.counterexamples) {
      const auto path = std::filesystem::path(a.counterexample_dir) / (c.suite + "_trial" + std::to_string(c.trial) + ".json");
      std::ofstream(path) << c.model.dump(2) << "\n";
      files.push_back(path.string());
    }
    out["counterexample_files"] = files;
  }
  if (!a.demo_model.empty()) {
    const auto spec = read_model(a.demo_model);
    out["atomless_demo"] = atomless_demo_to_json(spec, atomless_demo(spec, parse_vector(a.demo_alpha)));
  }
  if (!rep.ok()) code = invariant;
  return out;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--mode", o.mode, "scalar mode")->check(CLI::IsMember({"exact", "float"}));
  sub->add_option("--eps", o.eps, "zero tolerance in float mode")->check(CLI::PositiveNumber);
  sub->add_option("--cap", o.cap, "vertex enumeration cap (variables)")->check(CLI::PositiveNumber);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"absorbd: constrained absorbing MDPs through occupation measures"};
  app.require_subcommand(1);
  Options o;
  Args a;

  auto* validate_cmd = app.add_subcommand("validate", "structural checks of a model file");
  auto* absorb_cmd = app.add_subcommand("absorb-check", "uniform absorption verdict with certificate");
  auto* occ_cmd = app.add_subcommand("occmeasure", "occupation measure of a policy");
  auto* vert_cmd = app.add_subcommand("vertices", "vertices of the (constrained) occupation polytope");
  auto* image_cmd = app.add_subcommand("image", "achievable performance polytope");
  auto* match_cmd = app.add_subcommand("match", "chattering policy achieving a performance vector");
  auto* solve_cmd = app.add_subcommand("solve", "constrained optimization");
  auto* reduce_cmd = app.add_subcommand("reduce-stage", "shrink one stage of a Markov policy");
  auto* sim_cmd = app.add_subcommand("simulate", "seeded Monte Carlo estimates");
  auto* verify_cmd = app.add_subcommand("verify", "randomized exact verification suites");

  for (auto* s : {validate_cmd, absorb_cmd, occ_cmd, vert_cmd, image_cmd, match_cmd, solve_cmd, reduce_cmd, sim_cmd}) {
    s->add_option("model", a.model, "model JSON file")->required();
    add_common(s, o);
  }
  add_common(verify_cmd, o);
  for (auto* s : {occ_cmd, reduce_cmd, sim_cmd}) s->add_option("--policy", a.policy, "policy JSON file")->required();
  for (auto* s : {vert_cmd, image_cmd, solve_cmd})
    s->add_option("--constraint", a.constraints, "mass=4/3, r0<=1, or g.json=[alpha]");
  image_cmd->add_option("--target", a.targets, "performance vector to test, e.g. '[14/15]'");
  match_cmd->add_option("--target", a.target, "performance vector, e.g. '[14/15]'")->required();
  solve_cmd->add_option("--objective", a.objective, "weights c, default all ones");
  solve_cmd->add_flag("--minimize", a.minimize, "minimize instead of maximize");
  reduce_cmd->add_option("--stage", a.stage, "stage index t")->required();
  sim_cmd->add_option("--episodes", a.episodes)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", a.seed);
  sim_cmd->add_option("--horizon-cap", a.horizon_cap)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--trials", a.trials);
  verify_cmd->add_option("--seed", a.seed);
  verify_cmd->add_option("--suite", a.suites, "restrict to named suites");
  verify_cmd->add_option("--min-states", a.gen.min_states);
  verify_cmd->add_option("--max-states", a.gen.max_states);
  verify_cmd->add_option("--min-actions", a.gen.min_actions);
  verify_cmd->add_option("--max-actions", a.gen.max_actions);
  verify_cmd->add_option("--d", a.gen.d);
  verify_cmd->add_option("--delta-size", a.gen.delta_size);
  verify_cmd->add_option("--escape-floor", a.escape_floor);
  verify_cmd->add_option("--denominator", a.gen.denominator);
  verify_cmd->add_option("--counterexample-dir", a.counterexample_dir, "write failing models here");
  verify_cmd->add_option("--demo", a.demo_model, "model for the deterministic-insufficiency demonstration");
  verify_cmd->add_option("--alpha", a.demo_alpha, "target used by --demo");

  auto fail = [&](int code, const std::string& kind, const std::string& msg) {
    err << json{{"error", kind}, {"message", msg}}.dump() << "\n";
    return code;
  };

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    return fail(usage, "usage", e.what());
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  int code = ok;
  json result;
  try {
    if (o.eps <= 0) usage_error("--eps must be positive");
    const std::size_t cap = o.cap ? o.cap : env_cap(lp::kDefaultVertexCap);
    if (name != "occmeasure" && name != "solve" && name != "simulate") require_exact(o, name);
    if (name == "validate") result = cmd_validate(a, code);
    else if (name == "absorb-check") result = cmd_absorb_check(a, code);
    else if (name == "occmeasure") result = cmd_occmeasure(a, o);
    else if (name == "vertices") result = cmd_vertices(a, cap);
    else if (name == "image") result = cmd_image(a, cap);
    else if (name == "match") result = cmd_match(a);
    else if (name == "solve") result = cmd_solve(a, o);
    else if (name == "reduce-stage") result = cmd_reduce_stage(a);
    else if (name == "simulate") result = cmd_simulate(a, o);
    else result = cmd_verify(a, cap, code);
  } catch (const Failure& f) {
    return fail(f.code, f.kind, f.message);
  } catch (const InvariantViolation& e) {
    return fail(invariant, "invariant_violation", e.what());
  } catch (const Infeasible& e) {
    return fail(invalid, "infeasible", e.what());
  } catch (const Unachievable& e) {
    return fail(invalid, "unachievable", e.what());
  } catch (const NotAbsorbing& e) {
    return fail(invalid, "not_absorbing", e.what());
  } catch (const lp::TooLarge& e) {
    return fail(invalid, "too_large", e.what());
  } catch (const ModelError& e) {
    return fail(invalid, "invalid_input", e.what());
  } catch (const Unvalidated& e) {
    return fail(invalid, "invalid_model", e.what());
  } catch (const PolicyError& e) {
    return fail(invalid, "invalid_policy", e.what());
  } catch (const SupportTooLarge& e) {
    return fail(invalid, "invalid_policy", e.what());
  } catch (const BadConstraint& e) {
    return fail(invalid, "invalid_constraint", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(invalid, "invalid_input", e.what());
  } catch (const std::out_of_range& e) {
    return fail(invalid, "invalid_input", e.what());
  } catch (const std::exception& e) {
    return fail(invariant, "internal", e.what());
  }

  std::string echo = "absorbd";
  for (const auto& s : args) echo += " " + s;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(echo);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ordered_json report;
  report["command"] = echo;
  report["config_hash"] = hash.str();
  report["scalar_mode"] = o.mode;
  report["simd"] = std::string(simd::isa_name(simd::active_isa()));
  report["result"] = result;
  report["timing"] = {{"seconds", secs}};
  out << report.dump(2) << "\n";
  return code;
}

}  // namespace absorbd::cli
