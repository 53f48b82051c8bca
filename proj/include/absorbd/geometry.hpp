#pragma once

#include "absorbd/errors.hpp"
#include "absorbd/lp.hpp"
#include "absorbd/occupation.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace absorbd {

class BadConstraint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// mu(g) = alpha, with g of width alpha.size() vanishing on Delta.
struct IntegralConstraint {
  PairTable g;
  std::vector<Rational> alpha;
};

/// Characteristic-equation polytope, optionally sliced by integral constraints.
/// Variables are mu(x, a) over ModelSpec::transient_pairs(); the first
/// base_rows equalities are the characteristic equations, one per transient state.
struct CharPolytope {
  ModelSpec model;
  std::vector<StateAction> pairs;
  std::size_t base_rows = 0;
  std::vector<IntegralConstraint> constraints;
  lp::StandardLP<Rational> lp;

  std::size_t constraint_rows() const { return lp.n_rows() - base_rows; }
};

/// Builds O (no constraints) or O(g, alpha). Throws BadConstraint when some g
/// charges Delta or has the wrong shape.
CharPolytope build_polytope(const ModelSpec& spec, const std::vector<IntegralConstraint>& constraints = {});

/// Pair table of width `width` that is constant `value` on every transient pair.
PairTable constant_table(const ModelSpec& spec, std::size_t width, const Rational& value);
/// Single column i of the reward table.
PairTable reward_component(const ModelSpec& spec, std::size_t i);

template <class T>
lp::StandardLP<T> convert_lp(const lp::StandardLP<Rational>& src) {
  if constexpr (std::is_same_v<T, Rational>) {
    return src;
  } else {
    lp::StandardLP<T> out{Matrix<T>(src.n_rows(), src.n_vars()), convert_vector<T>(src.b), convert_vector<T>(src.c)};
    for (std::size_t i = 0; i < src.n_rows(); ++i)
      for (std::size_t j = 0; j < src.n_vars(); ++j) out.a(i, j) = Arith<T>::from(src.a(i, j));
    return out;
  }
}

struct ExtremeOccupation {
  ExactMeasure measure;
  DeterministicStationaryPolicy policy;
};

/// Vertices of O paired with the deterministic policies that generate them.
/// Cross-checks against the occupation measures of all deterministic
/// policies and throws ExtremeNotDeterministic if either direction fails.
std::vector<ExtremeOccupation> extreme_occupations(const ModelSpec& spec, std::size_t cap = lp::kDefaultVertexCap);

/// Distinct occupation measures of all deterministic stationary policies,
/// with the first policy (lexicographic) that generates each.
std::vector<ExtremeOccupation> deterministic_occupations(const ModelSpec& spec);

/// A polytope in R^d given by its vertices (no redundant points).
struct VPolytope {
  std::size_t dim = 0;
  std::vector<std::vector<Rational>> vertices;
};

/// Convex hull of mu(r) over the vertices of poly, reduced to extreme points.
VPolytope image_polytope(const ModelSpec& spec, const CharPolytope& poly, std::size_t cap = lp::kDefaultVertexCap);

/// Drops duplicates and points lying in the hull of the others.
VPolytope hull_of(std::size_t dim, std::vector<std::vector<Rational>> points);

/// beta in conv(image)?
bool hull_contains(const VPolytope& image, const std::vector<Rational>& beta);

/// beta in the relative interior of conv(image): beta is a convex combination
/// with strictly positive weight on every vertex.
bool relative_interior_contains(const VPolytope& image, const std::vector<Rational>& beta);

/// Dimension of the affine hull of the vertices.
std::size_t affine_dimension(const VPolytope& image);

/// Normals to the affine hull (functionals constant on the image).
std::vector<std::vector<Rational>> affine_hull_normals(const VPolytope& image);

/// x is an extreme point of {A y = b, y >= 0}: the only y with both y and 2x - y
/// feasible is y = x. Decided by maximizing and minimizing every coordinate
/// over that midpoint set.
bool is_extreme_point(const lp::StandardLP<Rational>& lp, const std::vector<Rational>& x);

nlohmann::json vpolytope_to_json(const VPolytope& p);

}  // namespace absorbd
