#pragma once

#include "absorbd/errors.hpp"
#include "absorbd/geometry.hpp"
#include "absorbd/occupation.hpp"
#include "absorbd/policy.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace absorbd {

/// Target performance vector lies outside R(Pi).
class Unachievable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeightedIndex {
  std::size_t index = 0;
  Rational weight;
};

/// Carathéodory support reduction. Given positive weights summing to one on
/// points in R^m, returns a subset of the indices with positive weights
/// summing to one and the same barycenter, of size at most m + 1. Identical
/// points are merged first (onto the lowest index). With `minimal`, reduction
/// continues until the kept points are affinely independent.
std::vector<WeightedIndex> caratheodory_reduce(std::span<const Rational> weights,
                                               const std::vector<std::vector<Rational>>& points, bool minimal = false);

/// Result of replacing one stage kernel of a Markov policy.
struct StageReduction {
  MarkovPolicy policy;
  std::size_t stage = 0;
  /// Largest per-state support of the new stage kernel.
  std::size_t max_support = 0;
  /// E[r+(X_t,A_t)], E[r-(X_t,A_t)] stacked, before and after.
  std::vector<Rational> split_reward_before, split_reward_after;
  /// Total performance vectors before and after.
  std::vector<Rational> total_before, total_after;
  /// Whether the reduction kept E[(r+, r-)(X_t, A_t)] as well; the signed
  /// stage reward and the total are always kept.
  bool split_preserved = false;
};

/// Replaces stage t of pi by a kernel with per-state support at most 2d + 1
/// that leaves the stage-t expected reward and the total performance vector
/// unchanged. Throws InvariantViolation if the exact postcheck fails.
StageReduction stage_reduce(const ModelSpec& spec, const MarkovPolicy& pi, std::size_t t);

/// Applies stage_reduce to every stage 0..T-1 in turn.
MarkovPolicy reduce_all_stages(const ModelSpec& spec, const MarkovPolicy& pi);

/// Reads a chattering stationary policy off a vertex of O(g, alpha) with p
/// constraint rows. Only the first |transient pairs| coordinates of `values`
/// are used (trailing slack variables are ignored). Throws OrderBoundViolated
/// when some charged state randomizes over more than p + 1 actions.
ChatteringStationaryPolicy vertex_to_chattering(const ModelSpec& spec, std::span<const Rational> values, std::size_t p);

struct MixtureComponent {
  Rational weight;
  DeterministicStationaryPolicy policy;
  ExactMeasure measure;
};

struct MixtureDecomposition {
  std::vector<MixtureComponent> components;
  ExactMeasure target;
};

/// Writes a vertex measure as a convex combination of at most `bound`
/// deterministic occupation measures. Throws NoDecomposition if none exists.
MixtureDecomposition decompose_vertex(const ModelSpec& spec, std::span<const Rational> values, std::size_t bound);

/// Chattering policy whose occupation measure equals the mixture, with the
/// mixture's deterministic policies as selectors.
ChatteringStationaryPolicy mixture_to_stationary(const ModelSpec& spec, const MixtureDecomposition& mix);

struct MatchResult {
  ChatteringStationaryPolicy policy;
  std::vector<Rational> performance;
  std::vector<Rational> residual;
};

/// A chattering stationary policy of order <= d + 1 with mu_gamma(r) = target
/// exactly. Throws Unachievable when target is not in R(Pi).
MatchResult match_performance(const ModelSpec& spec, const std::vector<Rational>& target);

}  // namespace absorbd
