#include "absorbd/geometry.hpp"

#include <set>

namespace absorbd {

using nlohmann::json;

PairTable constant_table(const ModelSpec& spec, std::size_t width, const Rational& value) {
  PairTable g(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    g[x].assign(spec.actions[x].size(), std::vector<Rational>(width, spec.is_delta(x) ? Rational(0) : value));
  return g;
}

PairTable reward_component(const ModelSpec& spec, std::size_t i) {
  PairTable g(spec.num_states());
  for (std::size_t x = 0; x < spec.num_states(); ++x)
    for (std::size_t a = 0; a < spec.actions[x].size(); ++a) g[x].push_back({spec.rewards[x][a][i]});
  return g;
}

CharPolytope build_polytope(const ModelSpec& spec, const std::vector<IntegralConstraint>& constraints) {
  if (auto v = validate(spec); !v.ok) throw Unvalidated("model is invalid: " + v.violations.front());
  CharPolytope poly;
  poly.model = spec;
  poly.pairs = spec.transient_pairs();
  poly.constraints = constraints;
  const auto trans = spec.transient_states();
  poly.base_rows = trans.size();
  const std::size_t nvars = poly.pairs.size();

  std::size_t extra = 0;
  for (const auto& c : constraints) {
    if (c.g.size() != spec.num_states()) throw BadConstraint("constraint table does not cover every state");
    for (std::size_t x = 0; x < spec.num_states(); ++x) {
      if (c.g[x].size() != spec.actions[x].size()) throw BadConstraint("constraint table has wrong action count at " + spec.states[x]);
      for (std::size_t a = 0; a < spec.actions[x].size(); ++a) {
        if (c.g[x][a].size() != c.alpha.size()) throw BadConstraint("constraint width differs from its level vector");
        if (spec.is_delta(x))
          for (const auto& v : c.g[x][a])
            if (!v.is_zero()) throw BadConstraint("constraint function charges delta at " + spec.states[x]);
      }
    }
    extra += c.alpha.size();
  }

  auto& lp = poly.lp;
  lp.a = Matrix<Rational>(poly.base_rows + extra, nvars, Rational(0));
  lp.b.assign(poly.base_rows + extra, Rational(0));
  lp.c.assign(nvars, Rational(0));
  std::vector<std::size_t> pos(spec.num_states(), 0);
  for (std::size_t i = 0; i < trans.size(); ++i) pos[trans[i]] = i;

  // mu^X(y) - sum mu(x,a) Q(y|x,a) = eta(y) for transient y.
  for (std::size_t k = 0; k < nvars; ++k) {
    const auto [x, a] = poly.pairs[k];
    lp.a(pos[x], k) += 1;
    for (std::size_t j = 0; j < trans.size(); ++j) {
      const auto& q = spec.kernel[x][a][trans[j]];
      if (!q.is_zero()) lp.a(j, k) -= q;
    }
  }
  for (std::size_t j = 0; j < trans.size(); ++j) lp.b[j] = spec.eta[trans[j]];

  std::size_t row = poly.base_rows;
  for (const auto& c : constraints)
    for (std::size_t i = 0; i < c.alpha.size(); ++i, ++row) {
      for (std::size_t k = 0; k < nvars; ++k) lp.a(row, k) = c.g[poly.pairs[k].state][poly.pairs[k].action][i];
      lp.b[row] = c.alpha[i];
    }
  return poly;
}

std::vector<ExtremeOccupation> deterministic_occupations(const ModelSpec& spec) {
  std::vector<ExtremeOccupation> out;
  std::set<std::vector<Rational>> seen;
  for (const auto& phi : enumerate_deterministic(spec)) {
    auto mu = occupation_of_stationary<Rational>(spec, phi, AbsorptionCheck::trusted);
    if (seen.insert(mu.mass).second) out.push_back({std::move(mu), phi});
  }
  return out;
}

std::vector<ExtremeOccupation> extreme_occupations(const ModelSpec& spec, std::size_t cap) {
  detail::require_absorbing(spec, AbsorptionCheck::verify);
  const auto poly = build_polytope(spec);
  const auto vertices = lp::enumerate_vertices(poly.lp, cap);

  std::vector<ExtremeOccupation> out;
  std::set<std::vector<Rational>> vertex_set;
  for (const auto& v : vertices) {
    auto mu = measure_from_values(spec, v.values);
    const auto sigma = disintegrate(spec, mu);
    const auto mx = mu.marginal(spec.num_states());
    DeterministicStationaryPolicy phi = first_action_policy(spec);
    for (std::size_t x = 0; x < spec.num_states(); ++x) {
      if (mx[x].sign() <= 0) continue;
      if (support_size(sigma, x) != 1)
        throw ExtremeNotDeterministic("vertex " + measure_to_json(spec, mu).dump() + " randomizes at state " + spec.states[x]);
      for (std::size_t a = 0; a < spec.actions[x].size(); ++a)
        if (sigma.dist[x][a].sign() > 0) phi.choice[x] = a;
    }
    vertex_set.insert(mu.mass);
    out.push_back({std::move(mu), phi});
  }

  std::set<std::vector<Rational>> det_set;
  for (const auto& e : deterministic_occupations(spec)) det_set.insert(e.measure.mass);
  if (det_set != vertex_set)
    throw ExtremeNotDeterministic("vertex set (" + std::to_string(vertex_set.size()) +
                                  ") differs from deterministic occupation measures (" + std::to_string(det_set.size()) + ")");
  return out;
}

namespace {

/// lambda >= 0, sum lambda = 1, sum lambda_i p_i = target.
lp::StandardLP<Rational> hull_lp(std::size_t dim, const std::vector<std::vector<Rational>>& pts,
                                 const std::vector<Rational>& target) {
  lp::StandardLP<Rational> lp{Matrix<Rational>(dim + 1, pts.size(), Rational(0)), std::vector<Rational>(dim + 1),
                              std::vector<Rational>(pts.size(), Rational(0))};
  for (std::size_t j = 0; j < pts.size(); ++j) {
    for (std::size_t i = 0; i < dim; ++i) lp.a(i, j) = pts[j][i];
    lp.a(dim, j) = 1;
  }
  for (std::size_t i = 0; i < dim; ++i) lp.b[i] = target[i];
  lp.b[dim] = 1;
  return lp;
}

}  // namespace

VPolytope hull_of(std::size_t dim, std::vector<std::vector<Rational>> points) {
  std::set<std::vector<Rational>> uniq(points.begin(), points.end());
  std::vector<std::vector<Rational>> pts;
  // Keep first-seen order for reproducible output.
  for (auto& p : points)
    if (uniq.erase(p)) pts.push_back(std::move(p));
  VPolytope out{dim, {}};
  for (std::size_t j = 0; j < pts.size(); ++j) {
    std::vector<std::vector<Rational>> others;
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (k != j) others.push_back(pts[k]);
    if (!others.empty() && lp::feasible_point(hull_lp(dim, others, pts[j]))) continue;
    out.vertices.push_back(pts[j]);
  }
  return out;
}

VPolytope image_polytope(const ModelSpec& spec, const CharPolytope& poly, std::size_t cap) {
  std::vector<std::vector<Rational>> images;
  for (const auto& v : lp::enumerate_vertices(poly.lp, cap))
    images.push_back(performance(spec, measure_from_values(spec, v.values)));
  return hull_of(spec.d, std::move(images));
}

bool hull_contains(const VPolytope& image, const std::vector<Rational>& beta) {
  if (image.vertices.empty()) return false;
  return lp::feasible_point(hull_lp(image.dim, image.vertices, beta)).has_value();
}

bool relative_interior_contains(const VPolytope& image, const std::vector<Rational>& beta) {
  const std::size_t k = image.vertices.size();
  if (k == 0) return false;
  // Weights lambda_i = s_i + t with s_i >= 0; maximize the common floor t.
  auto base = hull_lp(image.dim, image.vertices, beta);
  lp::StandardLP<Rational> lp{Matrix<Rational>(image.dim + 1, k + 1, Rational(0)), base.b, std::vector<Rational>(k + 1, Rational(0))};
  for (std::size_t i = 0; i <= image.dim; ++i) {
    Rational row_sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      lp.a(i, j) = base.a(i, j);
      row_sum += base.a(i, j);
    }
    lp.a(i, k) = row_sum;
  }
  lp.c[k] = 1;
  auto s = lp::solve(lp, lp::Goal::maximize);
  return s.status == lp::Status::optimal && s.objective.sign() > 0;
}

namespace {

Matrix<Rational> difference_matrix(const VPolytope& image) {
  Matrix<Rational> m(0, image.dim);
  for (std::size_t j = 1; j < image.vertices.size(); ++j) {
    std::vector<Rational> diff(image.dim);
    for (std::size_t i = 0; i < image.dim; ++i) diff[i] = image.vertices[j][i] - image.vertices[0][i];
    m.append_row(diff);
  }
  return m;
}

}  // namespace

std::size_t affine_dimension(const VPolytope& image) {
  if (image.vertices.size() <= 1) return 0;
  return rank(difference_matrix(image));
}

std::vector<std::vector<Rational>> affine_hull_normals(const VPolytope& image) {
  if (image.vertices.empty()) return {};
  return null_space(difference_matrix(image));
}

bool is_extreme_point(const lp::StandardLP<Rational>& lp, const std::vector<Rational>& x) {
  const std::size_t m = lp.n_rows(), n = lp.n_vars();
  // Variables (y, s): A y = b, y + s = 2x, y, s >= 0.
  lp::StandardLP<Rational> mid{Matrix<Rational>(m + n, 2 * n, Rational(0)), std::vector<Rational>(m + n),
                               std::vector<Rational>(2 * n, Rational(0))};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) mid.a(i, j) = lp.a(i, j);
    mid.b[i] = lp.b[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    mid.a(m + j, j) = 1;
    mid.a(m + j, n + j) = 1;
    mid.b[m + j] = 2 * x[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (x[j].sign() <= 0) continue;
    mid.c.assign(2 * n, Rational(0));
    mid.c[j] = 1;
    for (auto goal : {lp::Goal::maximize, lp::Goal::minimize}) {
      auto s = lp::solve(mid, goal);
      if (s.status != lp::Status::optimal) return false;
      if (s.objective != x[j]) return false;
    }
  }
  return true;
}

json vpolytope_to_json(const VPolytope& p) {
  json verts = json::array();
  for (const auto& v : p.vertices) {
    json row = json::array();
    for (const auto& c : v) row.push_back(to_string(c));
    verts.push_back(row);
  }
  return {{"dim", p.dim}, {"affine_dimension", affine_dimension(p)}, {"vertices", verts}};
}

}  // namespace absorbd
