#pragma once
// Linear regions of ReLU networks: the open polyhedron on which a given
// activation mask is realized, its recession cone, and linear maximization
// over cone ∩ unit ball.

#include <limits>
#include <optional>
#include <vector>

#include "wdro/linalg.hpp"
#include "wdro/lp.hpp"
#include "wdro/network.hpp"

namespace wdro {

/// sign * (a.x + b) > 0, one per hidden unit.
struct Halfspace {
  Vec a;
  double b = 0.0;
  int sign = 1;
};

struct CellPolyhedron {
  std::vector<Halfspace> halfspaces;
  Mask mask;
  /// On the cell theta(x) = jacobian * x + offset.
  Mat jacobian;
  Vec offset;
};

/// sign * (a.u) >= 0.
struct ConeRow {
  Vec a;
  int sign = 1;
};

struct RecessionCone {
  std::size_t dim = 0;
  std::vector<ConeRow> rows;
};

/// Strictness margin for open cells and interior cones, scaled by ||a||_2.
inline constexpr double kStrictMargin = 1e-9;

/// Largest cone violation accepted for a normalized L2 maximizer; beyond it
/// the projection is treated as zero.
inline constexpr double kConeDirectionTolerance = 1e-8;

CellPolyhedron build_cell(const Mlp& net, const Mask& mask);
RecessionCone recession_cone(const CellPolyhedron& cell);

/// True iff some x in the box satisfies every halfspace with margin kStrictMargin*||a||.
bool cell_feasible(const CellPolyhedron& cell, const Box& box);

/// A point of cell ∩ box maximizing the smallest normalized halfspace slack,
/// or nullopt if the cell misses the box (slack below kStrictMargin).
std::optional<Vec> cell_interior_point(const CellPolyhedron& cell, const Box& box);

/// True iff x satisfies every halfspace strictly.
bool cell_contains(const CellPolyhedron& cell, const Vec& x);

struct ConeMaximum {
  /// Infeasible: cone ∩ unit sphere is empty, or (interior) the cone has empty interior.
  LpStatus status = LpStatus::Optimal;
  /// -infinity when infeasible.
  double value = -std::numeric_limits<double>::infinity();
  Vec u;
  /// Every nonzero cone direction strictly decreases c.u; value reports the ball maximum 0.
  bool all_descent = false;
};

struct DykstraOptions {
  int max_sweeps = 10000;
  double tolerance = 1e-10;
};

/// max { c.u : u in cone, ||u||_r <= 1 }. Exact LP for L1 and LInf, Dykstra
/// projection of c onto the cone for L2.
ConeMaximum max_linear_over_cone_ball(const Vec& c, const RecessionCone& cone, NormKind r,
                                      bool interior, const DykstraOptions& dykstra = {});

/// Euclidean projection onto a polyhedral cone by cyclic Dykstra projections.
Vec project_onto_cone(const Vec& c, const RecessionCone& cone, const DykstraOptions& opts = {},
                      int* sweeps_used = nullptr);

/// True iff the cone is {0}.
bool cone_is_trivial(const RecessionCone& cone);
/// True iff some u has sign*a.u >= kStrictMargin*||a|| for every row.
bool cone_has_interior(const RecessionCone& cone);

/// Largest violation of the cone rows at u (0 when u is inside).
double cone_violation(const RecessionCone& cone, const Vec& u);

}  // namespace wdro
