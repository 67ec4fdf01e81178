#pragma once
// Dense two-phase simplex for the small linear programs behind cell
// feasibility, cone maximization and discrete optimal transport.

#include <string_view>
#include <vector>

#include "wdro/linalg.hpp"

namespace wdro {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class Relation { LessEq, GreaterEq, Equal };

std::string_view to_string(LpStatus s);

struct LpConstraint {
  Vec a;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

/// maximize objective . x subject to the constraints. Variables are x >= 0
/// unless marked in `free_vars` (same length as the objective, or empty).
struct LpProblem {
  Vec objective;
  std::vector<LpConstraint> constraints;
  std::vector<bool> free_vars;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double value = 0.0;
  int pivots = 0;
};

/// Bland's smallest-index rule for both the entering and leaving variable,
/// so degenerate problems terminate.
LpSolution solve_lp(const LpProblem& p);

/// Largest violation of the constraints (and sign constraints) at x.
double max_violation(const LpProblem& p, const Vec& x);

}  // namespace wdro
