#include "absorbd/solver.hpp"

#include <cmath>

namespace absorbd {

using nlohmann::json;

CriterionConstraint reward_criterion(const ModelSpec& spec, std::size_t i, Relation rel, const Rational& level) {
  if (i >= spec.d) throw std::invalid_argument("criterion r" + std::to_string(i) + " does not exist (d = " + std::to_string(spec.d) + ")");
  return {"r" + std::to_string(i), reward_component(spec, i), rel, level};
}

CriterionConstraint mass_criterion(const ModelSpec& spec, Relation rel, const Rational& level) {
  return {"mass", constant_table(spec, 1, Rational(1)), rel, level};
}

lp::StandardLP<Rational> problem_lp(const ProblemSpec& problem) {
  const auto& spec = problem.model;
  if (problem.objective.size() != spec.d)
    throw std::invalid_argument("objective has " + std::to_string(problem.objective.size()) + " weights, model has d = " +
                                std::to_string(spec.d));
  std::vector<IntegralConstraint> rows;
  for (const auto& c : problem.constraints) rows.push_back({c.g, {c.level}});
  const auto poly = build_polytope(spec, rows);
  const std::size_t np = poly.pairs.size();
  std::size_t slacks = 0;
  for (const auto& c : problem.constraints)
    if (c.relation != Relation::equal) ++slacks;

  lp::StandardLP<Rational> lp{Matrix<Rational>(poly.lp.n_rows(), np + slacks, Rational(0)), poly.lp.b,
                              std::vector<Rational>(np + slacks, Rational(0))};
  for (std::size_t i = 0; i < poly.lp.n_rows(); ++i)
    for (std::size_t j = 0; j < np; ++j) lp.a(i, j) = poly.lp.a(i, j);
  std::size_t s = np;
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const auto rel = problem.constraints[k].relation;
    if (rel == Relation::equal) continue;
    lp.a(poly.base_rows + k, s++) = rel == Relation::less_equal ? Rational(1) : Rational(-1);
  }
  for (std::size_t j = 0; j < np; ++j) {
    const auto [x, a] = poly.pairs[j];
    for (std::size_t i = 0; i < spec.d; ++i) lp.c[j] += problem.objective[i] * spec.rewards[x][a][i];
  }
  return lp;
}

namespace {

template <class T>
struct RawOptimum {
  lp::BasicSolution<T> sol;
  lp::StandardLP<T> lp;
  std::size_t pairs = 0;
};

template <class T>
RawOptimum<T> optimize(const ProblemSpec& problem, const Arith<T>& ar) {
  detail::require_absorbing(problem.model, AbsorptionCheck::verify);
  RawOptimum<T> raw;
  raw.lp = convert_lp<T>(problem_lp(problem));
  raw.pairs = problem.model.transient_pairs().size();
  raw.sol = lp::solve(raw.lp, problem.goal, ar);
  if (raw.sol.status == lp::Status::infeasible) throw Infeasible("constraints admit no occupation measure");
  if (raw.sol.status == lp::Status::unbounded)
    throw InvariantViolation("objective is unbounded over the occupation polytope; the model cannot be absorbing");
  return raw;
}

template <class T>
void fill_constraint_report(const ProblemSpec& problem, SolveResult<T>& res, const Arith<T>& ar) {
  std::size_t eq = 0, tight = 0;
  for (const auto& c : problem.constraints) {
    const T achieved = integrate(res.measure, c.g, 1)[0];
    const T slack = Arith<T>::from(c.level) - achieved;
    res.slacks.push_back(slack);
    if (c.relation == Relation::equal)
      ++eq;
    else if (ar.is_zero(slack))
      ++tight;
  }
  res.order_bound = eq + tight;
}

template <class T>
json num(const T& v) {
  return to_string(v);
}

template <class T>
json result_json(const ModelSpec& spec, const SolveResult<T>& r, const ProblemSpec& problem) {
  json perf = json::array();
  for (const auto& v : r.performance) perf.push_back(num(v));
  json cons = json::array();
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const auto& c = problem.constraints[k];
    const char* rel = c.relation == Relation::equal ? "=" : c.relation == Relation::less_equal ? "<=" : ">=";
    cons.push_back({{"label", c.label}, {"relation", rel}, {"level", to_string(c.level)}, {"slack", num(r.slacks[k])}});
  }
  json out = {{"value", num(r.value)},
              {"performance", perf},
              {"constraints", cons},
              {"order_bound", r.order_bound},
              {"order", r.policy.order()},
              {"policy", policy_to_json(spec, r.policy)},
              {"occupation", measure_to_json(spec, r.measure)}};
  if (r.dual) {
    json y = json::array();
    for (const auto& v : r.dual->duals) y.push_back(to_string(v));
    out["dual_report"] = {{"duals", y},
                          {"dual_feasible", r.dual->dual_feasible},
                          {"complementary_slackness", r.dual->complementary_slackness}};
  }
  return out;
}

}  // namespace

SolveResult<Rational> solve_constrained(const ProblemSpec& problem) {
  const Arith<Rational> ar;
  const auto& spec = problem.model;
  auto raw = optimize(problem, ar);
  SolveResult<Rational> res;
  res.measure = measure_from_values(spec, std::span<const Rational>(raw.sol.values).first(raw.pairs));
  res.performance = performance(spec, res.measure);
  res.value = raw.sol.objective;
  fill_constraint_report(problem, res, ar);
  res.policy = vertex_to_chattering(spec, raw.sol.values, res.order_bound);

  DualReport dual;
  dual.duals = raw.sol.duals;
  dual.dual_feasible = true;
  dual.complementary_slackness = true;
  for (std::size_t j = 0; j < raw.lp.n_vars(); ++j) {
    Rational rc = raw.lp.c[j];
    for (std::size_t i = 0; i < raw.lp.n_rows(); ++i)
      if (!raw.lp.a(i, j).is_zero()) rc -= dual.duals[i] * raw.lp.a(i, j);
    const bool ok = problem.goal == lp::Goal::maximize ? rc.sign() <= 0 : rc.sign() >= 0;
    if (!ok) dual.dual_feasible = false;
    if (raw.sol.values[j].sign() > 0 && !rc.is_zero()) dual.complementary_slackness = false;
  }
  res.dual = std::move(dual);
  return res;
}

SolveResult<double> solve_constrained_float(const ProblemSpec& problem, const Arith<double>& ar) {
  const auto& spec = problem.model;
  auto raw = optimize(problem, ar);
  SolveResult<double> res;
  res.measure = zero_measure<double>(spec);
  for (std::size_t k = 0; k < raw.pairs; ++k) res.measure.mass[k] = ar.is_zero(raw.sol.values[k]) ? 0.0 : raw.sol.values[k];
  res.performance = performance(spec, res.measure);
  res.value = raw.sol.objective;
  fill_constraint_report(problem, res, ar);

  const auto sigma = disintegrate(spec, res.measure, ar);
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    if (support_size(sigma, x) > res.order_bound + 1)
      throw OrderBoundViolated("floating vertex randomizes over " + std::to_string(support_size(sigma, x)) + " actions at " + spec.states[x]);
  res.policy = pack_selectors(sigma, res.order_bound + 1);
  const auto check = occupation_of_stationary<double>(spec, as_stationary(res.policy, spec), AbsorptionCheck::trusted, ar);
  const double scale = 1.0 + res.measure.total();
  for (std::size_t k = 0; k < raw.pairs; ++k)
    if (std::abs(check.mass[k] - res.measure.mass[k]) > 1e3 * ar.eps * scale)
      throw InvariantViolation("floating chattering policy does not reproduce the optimal vertex");
  return res;
}

ImageReport image_report(const ProblemSpec& problem, const std::vector<std::vector<Rational>>& targets, std::size_t cap) {
  const auto& spec = problem.model;
  detail::require_absorbing(spec, AbsorptionCheck::verify);
  const auto lp = problem_lp(problem);
  const std::size_t np = spec.transient_pairs().size();
  std::vector<std::vector<Rational>> images;
  for (const auto& v : lp::enumerate_vertices(lp, cap))
    images.push_back(performance(spec, measure_from_values(spec, std::span<const Rational>(v.values).first(np))));
  ImageReport rep;
  rep.image = hull_of(spec.d, std::move(images));
  for (const auto& t : targets) rep.targets.push_back({t, hull_contains(rep.image, t), relative_interior_contains(rep.image, t)});
  return rep;
}

json solve_result_to_json(const ModelSpec& spec, const SolveResult<Rational>& r, const ProblemSpec& problem) {
  return result_json(spec, r, problem);
}

json solve_result_to_json(const ModelSpec& spec, const SolveResult<double>& r, const ProblemSpec& problem) {
  return result_json(spec, r, problem);
}

}  // namespace absorbd
