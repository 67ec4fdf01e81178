#include "wdro/cells.hpp"

#include <algorithm>
#include <cmath>

#include "wdro/error.hpp"

namespace wdro {

CellPolyhedron build_cell(const Mlp& net, const Mask& mask) {
  if (net.activation() != ActivationKind::ReLU)
    throw Error(ErrorCode::WrongActivation, "cells are defined for ReLU nets only");
  if (mask.diags.size() != net.hidden_layers())
    throw Error(ErrorCode::ShapeMismatch, "mask layer count differs from hidden layer count");
  const auto& layers = net.layers();
  CellPolyhedron cell;
  cell.mask = mask;
  // Masked affine pre-activations: A_1 = W_1, b_1 as given, then
  // A_h = W_h D_{h-1} A_{h-1}, b_h = W_h D_{h-1} b_{h-1} + b_h.
  Mat a = layers.front().weight;
  Vec b = layers.front().bias;
  for (std::size_t h = 0; h < net.hidden_layers(); ++h) {
    const auto& diag = mask.diags[h];
    if (diag.size() != net.hidden_width(h))
      throw Error(ErrorCode::ShapeMismatch, "mask width differs at hidden layer " +
                                                std::to_string(h + 1));
    for (std::size_t j = 0; j < diag.size(); ++j) {
      Vec row(std::vector<double>(a.row(j).begin(), a.row(j).end()));
      cell.halfspaces.push_back({std::move(row), b[j], diag[j] ? 1 : -1});
    }
    std::vector<double> d(diag.begin(), diag.end());
    const Mat masked = scale_rows(a, d);
    Vec masked_b = b;
    for (std::size_t j = 0; j < d.size(); ++j) masked_b[j] *= d[j];
    a = layers[h + 1].weight * masked;
    b = layers[h + 1].weight * masked_b;
    b += layers[h + 1].bias;
  }
  cell.jacobian = std::move(a);
  cell.offset = std::move(b);
  return cell;
}

RecessionCone recession_cone(const CellPolyhedron& cell) {
  RecessionCone cone;
  cone.dim = cell.jacobian.cols();
  for (const auto& h : cell.halfspaces) cone.rows.push_back({h.a, h.sign});
  return cone;
}

bool cell_contains(const CellPolyhedron& cell, const Vec& x) {
  return std::all_of(cell.halfspaces.begin(), cell.halfspaces.end(), [&](const Halfspace& h) {
    return h.sign * (dot(h.a, x) + h.b) > 0.0;
  });
}

namespace {

void add_box_rows(LpProblem& lp, const Box& box, std::size_t vars) {
  for (std::size_t i = 0; i < box.dim(); ++i) {
    Vec e(vars);
    e[i] = 1.0;
    lp.constraints.push_back({e, Relation::LessEq, box.hi[i]});
    lp.constraints.push_back({e, Relation::GreaterEq, box.lo[i]});
  }
}

// Cell rows as sign*a.x - t*||a|| >= -sign*b over variables (x, t).
LpProblem margin_problem(const CellPolyhedron& cell, const Box& box) {
  const std::size_t n = box.dim();
  LpProblem lp;
  lp.objective = Vec(n + 1);
  lp.objective[n] = 1.0;
  lp.free_vars.assign(n + 1, true);
  for (const auto& h : cell.halfspaces) {
    Vec row(n + 1);
    const double norm = vec_norm(h.a, NormKind::L2);
    for (std::size_t i = 0; i < n; ++i) row[i] = h.sign * h.a[i];
    row[n] = -(norm > 0.0 ? norm : 1.0);
    lp.constraints.push_back({std::move(row), Relation::GreaterEq, -h.sign * h.b});
  }
  add_box_rows(lp, box, n + 1);
  Vec cap(n + 1);
  cap[n] = 1.0;
  lp.constraints.push_back({cap, Relation::LessEq, 1.0});
  return lp;
}

}  // namespace

std::optional<Vec> cell_interior_point(const CellPolyhedron& cell, const Box& box) {
  if (cell.jacobian.cols() != box.dim())
    throw Error(ErrorCode::DimensionMismatch, "cell and box dimensions differ");
  const LpSolution sol = solve_lp(margin_problem(cell, box));
  if (sol.status != LpStatus::Optimal || sol.x[box.dim()] < kStrictMargin) return std::nullopt;
  Vec x(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) x[i] = sol.x[i];
  return box.clamp(x);
}

bool cell_feasible(const CellPolyhedron& cell, const Box& box) {
  if (cell.halfspaces.empty()) return true;
  if (cell.jacobian.cols() != box.dim())
    throw Error(ErrorCode::DimensionMismatch, "cell and box dimensions differ");
  const std::size_t n = box.dim();
  LpProblem lp;
  lp.objective = Vec(n);
  lp.free_vars.assign(n, true);
  for (const auto& h : cell.halfspaces) {
    const double norm = vec_norm(h.a, NormKind::L2);
    Vec row = h.a;
    row *= static_cast<double>(h.sign);
    lp.constraints.push_back(
        {std::move(row), Relation::GreaterEq, kStrictMargin * (norm > 0.0 ? norm : 1.0) - h.sign * h.b});
  }
  add_box_rows(lp, box, n);
  return solve_lp(lp).status == LpStatus::Optimal;
}

double cone_violation(const RecessionCone& cone, const Vec& u) {
  double worst = 0.0;
  for (const auto& row : cone.rows) worst = std::max(worst, -row.sign * dot(row.a, u));
  return worst;
}

namespace {

// Cone rows over variables u (free) inside [-1, 1]^n, optionally with margin.
LpProblem cone_box_problem(const RecessionCone& cone, bool margin) {
  const std::size_t n = cone.dim;
  LpProblem lp;
  lp.objective = Vec(n);
  lp.free_vars.assign(n, true);
  for (const auto& row : cone.rows) {
    Vec a = row.a;
    a *= static_cast<double>(row.sign);
    const double rhs = margin ? kStrictMargin * vec_norm(row.a, NormKind::L2) : 0.0;
    lp.constraints.push_back({std::move(a), Relation::GreaterEq, rhs});
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vec e(n);
    e[i] = 1.0;
    lp.constraints.push_back({e, Relation::LessEq, 1.0});
    lp.constraints.push_back({e, Relation::GreaterEq, -1.0});
  }
  return lp;
}

}  // namespace

bool cone_has_interior(const RecessionCone& cone) {
  if (cone.rows.empty()) return true;
  return solve_lp(cone_box_problem(cone, true)).status == LpStatus::Optimal;
}

bool cone_is_trivial(const RecessionCone& cone) {
  if (cone.rows.empty()) return cone.dim == 0;
  LpProblem lp = cone_box_problem(cone, false);
  for (std::size_t i = 0; i < cone.dim; ++i) {
    for (double direction : {1.0, -1.0}) {
      lp.objective = Vec(cone.dim);
      lp.objective[i] = direction;
      const LpSolution s = solve_lp(lp);
      if (s.status == LpStatus::Optimal && s.value > 1e-12) return false;
    }
  }
  return true;
}

Vec project_onto_cone(const Vec& c, const RecessionCone& cone, const DykstraOptions& opts,
                      int* sweeps_used) {
  const std::size_t m = cone.rows.size();
  std::vector<Vec> normals;
  std::vector<double> norm_sq;
  for (const auto& row : cone.rows) {
    Vec w = row.a;
    w *= static_cast<double>(row.sign);
    norm_sq.push_back(dot(w, w));
    normals.push_back(std::move(w));
  }
  Vec x = c;
  std::vector<Vec> increments(m, Vec(c.size()));
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    const Vec before = x;
    for (std::size_t i = 0; i < m; ++i) {
      if (norm_sq[i] == 0.0) continue;
      Vec y = x + increments[i];
      const double slack = dot(normals[i], y);
      Vec projected = y;
      if (slack < 0.0) {
        Vec step = normals[i];
        step *= slack / norm_sq[i];
        projected -= step;
      }
      increments[i] = y - projected;
      x = std::move(projected);
    }
    if (vec_norm(x - before, NormKind::L2) <= opts.tolerance &&
        cone_violation(cone, x) <= opts.tolerance)
      break;
  }
  if (sweeps_used) *sweeps_used = sweep;
  return x;
}

ConeMaximum max_linear_over_cone_ball(const Vec& c, const RecessionCone& cone, NormKind r,
                                      bool interior, const DykstraOptions& dykstra) {
  if (c.size() != cone.dim) throw Error(ErrorCode::DimensionMismatch, "objective vs cone dim");
  for (const auto& row : cone.rows)
    if (row.a.size() != cone.dim) throw Error(ErrorCode::DimensionMismatch, "cone row length");
  ConeMaximum out;
  const std::size_t n = cone.dim;
  if (interior && !cone_has_interior(cone)) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  if (cone.rows.empty()) {
    const DualMaximizer dm = dual_norm_maximizer(c, r);
    out.value = vec_norm(c, dual(r));
    out.u = dm.h;
    return out;
  }

  switch (r) {
    case NormKind::LInf: {
      LpProblem lp = cone_box_problem(cone, false);
      lp.objective = c;
      const LpSolution s = solve_lp(lp);
      if (s.status != LpStatus::Optimal)
        throw Error(ErrorCode::InvalidArgument, "cone LP over the LInf ball returned " +
                                                    std::string(to_string(s.status)));
      out.value = s.value;
      out.u = s.x;
      break;
    }
    case NormKind::L1: {
      // u = p - q with p, q >= 0 and sum(p + q) <= 1.
      LpProblem lp;
      lp.objective = Vec(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        lp.objective[i] = c[i];
        lp.objective[n + i] = -c[i];
      }
      for (const auto& row : cone.rows) {
        Vec a(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
          a[i] = row.sign * row.a[i];
          a[n + i] = -row.sign * row.a[i];
        }
        lp.constraints.push_back({std::move(a), Relation::GreaterEq, 0.0});
      }
      Vec ones(2 * n);
      std::fill(ones.begin(), ones.end(), 1.0);
      lp.constraints.push_back({ones, Relation::LessEq, 1.0});
      const LpSolution s = solve_lp(lp);
      if (s.status != LpStatus::Optimal)
        throw Error(ErrorCode::InvalidArgument, "cone LP over the L1 ball returned " +
                                                    std::string(to_string(s.status)));
      out.u = Vec(n);
      for (std::size_t i = 0; i < n; ++i) out.u[i] = s.x[i] - s.x[n + i];
      out.value = s.value;
      break;
    }
    case NormKind::L2: {
      const Vec p = project_onto_cone(c, cone, dykstra);
      const double norm = vec_norm(p, NormKind::L2);
      out.value = norm;
      out.u = norm > 0.0 ? (1.0 / norm) * p : Vec(n);
      // A projection at the Dykstra noise floor has no reliable direction.
      if (norm > 0.0 && cone_violation(cone, out.u) > kConeDirectionTolerance) out.value = 0.0;
      break;
    }
  }

  const double scale = std::max(1.0, vec_norm(c, NormKind::L2));
  if (out.value <= 1e-12 * scale) {
    if (cone_is_trivial(cone)) {
      out.status = LpStatus::Infeasible;
      out.value = -std::numeric_limits<double>::infinity();
      out.u = Vec(n);
      return out;
    }
    out.value = 0.0;
    out.u = Vec(n);
    out.all_descent = vec_norm(c, NormKind::LInf) > 0.0;
  }
  return out;
}

}  // namespace wdro
