#pragma once

#include "absorbd/chattering.hpp"
#include "absorbd/geometry.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace absorbd {

enum class Relation { equal, less_equal, greater_equal };

/// One scalar criterion row: mu(g) rel level, where g is a single-column pair table.
struct CriterionConstraint {
  std::string label;
  PairTable g;
  Relation relation = Relation::equal;
  Rational level;
};

struct ProblemSpec {
  ModelSpec model;
  /// Scalarization weights c; the objective is c . mu(r).
  std::vector<Rational> objective;
  std::vector<CriterionConstraint> constraints;
  lp::Goal goal = lp::Goal::maximize;
};

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builders for the usual criteria.
CriterionConstraint reward_criterion(const ModelSpec& spec, std::size_t i, Relation rel, const Rational& level);
/// g = 1 on transient pairs: mu(g) is the expected absorption time.
CriterionConstraint mass_criterion(const ModelSpec& spec, Relation rel, const Rational& level);

struct DualReport {
  std::vector<Rational> duals;
  bool dual_feasible = false;
  bool complementary_slackness = false;
};

template <class T>
struct SolveResult {
  ChatteringStationaryPolicy policy;
  T value = T(0);
  std::vector<T> performance;
  /// level - mu(g) for each constraint, in declaration order.
  std::vector<T> slacks;
  /// Equality rows plus tight inequality rows at the optimum.
  std::size_t order_bound = 0;
  OccupationMeasure<T> measure;
  std::optional<DualReport> dual;
};

/// Maximizes (or minimizes) c . mu(r) over O intersected with the criterion
/// constraints and returns an optimal chattering policy read off the optimal
/// vertex. Throws Infeasible; unboundedness is an InvariantViolation.
SolveResult<Rational> solve_constrained(const ProblemSpec& problem);
SolveResult<double> solve_constrained_float(const ProblemSpec& problem, const Arith<double>& ar);

struct ImageReport {
  VPolytope image;
  struct Flag {
    std::vector<Rational> target;
    bool member = false;
    bool relative_interior = false;
  };
  std::vector<Flag> targets;
};

/// Achievable performance polytope of the constrained problem and membership
/// flags for the given targets.
ImageReport image_report(const ProblemSpec& problem, const std::vector<std::vector<Rational>>& targets,
                         std::size_t cap = lp::kDefaultVertexCap);

/// Standard-form LP of the problem: pair variables then one slack per inequality.
lp::StandardLP<Rational> problem_lp(const ProblemSpec& problem);

nlohmann::json solve_result_to_json(const ModelSpec& spec, const SolveResult<Rational>& r, const ProblemSpec& problem);
nlohmann::json solve_result_to_json(const ModelSpec& spec, const SolveResult<double>& r, const ProblemSpec& problem);

}  // namespace absorbd
