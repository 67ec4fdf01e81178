#include "wdro/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wdro/error.hpp"

namespace wdro {

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

constexpr double kReducedCostTol = 1e-10;
constexpr double kPivotTol = 1e-11;
constexpr double kFeasibilityTol = 1e-9;
constexpr int kMaxPivots = 200000;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (cols_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, cols_); }
  double& obj(std::size_t j) { return at(rows_, j); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::vector<bool>& active_rows() { return active_; }

  void init_active() { active_.assign(rows_, true); }

  void pivot(std::size_t r, std::size_t q) {
    const double p = at(r, q);
    for (std::size_t j = 0; j <= cols_; ++j) at(r, j) /= p;
    at(r, q) = 1.0;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r || (i < rows_ && !active_[i])) continue;
      const double f = at(i, q);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
      at(i, q) = 0.0;
      if (i < rows_ && rhs(i) < 0.0 && rhs(i) > -1e-12) rhs(i) = 0.0;
    }
    basis_[r] = q;
  }

  // Objective row: r_j = c_B . T_j - c_j ; value in the rhs slot.
  void load_objective(const std::vector<double>& cost) {
    for (std::size_t j = 0; j <= cols_; ++j) obj(j) = j < cols_ ? -cost[j] : 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!active_[i]) continue;
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) obj(j) += cb * at(i, j);
    }
  }

  // Bland's rule iterations; returns false when unbounded.
  bool optimize(const std::vector<bool>& allowed, int& pivots) {
    for (;;) {
      std::size_t q = cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        if (allowed[j] && obj(j) < -kReducedCostTol) {
          q = j;
          break;
        }
      if (q == cols_) return true;
      std::size_t r = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        if (!active_[i]) continue;
        const double a = at(i, q);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(i) / a;
        const double tie = 1e-12 * std::max(1.0, std::fabs(ratio));
        if (r == rows_ || ratio < best - tie) {
          best = ratio;
          r = i;
        } else if (std::fabs(ratio - best) <= tie && basis_[i] < basis_[r]) {
          r = i;
        }
      }
      if (r == rows_) return false;
      pivot(r, q);
      if (++pivots > kMaxPivots)
        throw Error(ErrorCode::InvalidArgument, "simplex pivot limit exceeded");
    }
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
};

}  // namespace

double max_violation(const LpProblem& p, const Vec& x) {
  double worst = 0.0;
  for (const auto& c : p.constraints) {
    const double lhs = dot(c.a, x);
    double v = 0.0;
    switch (c.rel) {
      case Relation::LessEq: v = lhs - c.rhs; break;
      case Relation::GreaterEq: v = c.rhs - lhs; break;
      case Relation::Equal: v = std::fabs(lhs - c.rhs); break;
    }
    worst = std::max(worst, v);
  }
  for (std::size_t j = 0; j < x.size(); ++j)
    if (p.free_vars.empty() || !p.free_vars[j]) worst = std::max(worst, -x[j]);
  return worst;
}

LpSolution solve_lp(const LpProblem& p) {
  const std::size_t n = p.objective.size();
  if (!p.free_vars.empty() && p.free_vars.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "free_vars length differs from objective");
  for (const auto& c : p.constraints)
    if (c.a.size() != n) throw Error(ErrorCode::DimensionMismatch, "constraint length");

  // Structural columns: free variables split into x+ and x-.
  std::vector<std::size_t> pos(n), neg(n, SIZE_MAX);
  std::size_t ncols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    pos[j] = ncols++;
    if (!p.free_vars.empty() && p.free_vars[j]) neg[j] = ncols++;
  }
  const std::size_t structural = ncols;

  const std::size_t m = p.constraints.size();
  // Normalized rows with non-negative rhs.
  std::vector<Relation> rel(m);
  std::vector<double> sign(m, 1.0);
  std::size_t slack_count = 0, artificial_count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    rel[i] = p.constraints[i].rel;
    if (p.constraints[i].rhs < 0.0) {
      sign[i] = -1.0;
      if (rel[i] == Relation::LessEq) rel[i] = Relation::GreaterEq;
      else if (rel[i] == Relation::GreaterEq) rel[i] = Relation::LessEq;
    }
    if (rel[i] != Relation::Equal) ++slack_count;
    if (rel[i] != Relation::LessEq) ++artificial_count;
  }
  const std::size_t first_slack = structural;
  const std::size_t first_artificial = structural + slack_count;
  const std::size_t total = first_artificial + artificial_count;

  Tableau tab(m, total);
  tab.init_active();
  std::size_t slack = first_slack, art = first_artificial;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = p.constraints[i];
    for (std::size_t j = 0; j < n; ++j) {
      tab.at(i, pos[j]) = sign[i] * c.a[j];
      if (neg[j] != SIZE_MAX) tab.at(i, neg[j]) = -sign[i] * c.a[j];
    }
    tab.rhs(i) = sign[i] * c.rhs;
    if (rel[i] == Relation::LessEq) {
      tab.at(i, slack) = 1.0;
      tab.basis()[i] = slack++;
    } else {
      if (rel[i] == Relation::GreaterEq) tab.at(i, slack++) = -1.0;
      tab.at(i, art) = 1.0;
      tab.basis()[i] = art++;
    }
  }

  LpSolution sol;
  std::vector<bool> allowed(total, true);

  if (artificial_count > 0) {
    std::vector<double> phase1(total, 0.0);
    for (std::size_t j = first_artificial; j < total; ++j) phase1[j] = -1.0;
    tab.load_objective(phase1);
    tab.optimize(allowed, sol.pivots);
    if (tab.obj(total) < -kFeasibilityTol) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] < first_artificial) continue;
      std::size_t q = total;
      for (std::size_t j = 0; j < first_artificial; ++j)
        if (std::fabs(tab.at(i, j)) > 1e-9) {
          q = j;
          break;
        }
      if (q == total) tab.active_rows()[i] = false;  // redundant row
      else tab.pivot(i, q);
    }
    for (std::size_t j = first_artificial; j < total; ++j) allowed[j] = false;
  }

  std::vector<double> cost(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cost[pos[j]] = p.objective[j];
    if (neg[j] != SIZE_MAX) cost[neg[j]] = -p.objective[j];
  }
  tab.load_objective(cost);
  if (!tab.optimize(allowed, sol.pivots)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  std::vector<double> col_value(total, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.active_rows()[i]) col_value[tab.basis()[i]] = tab.rhs(i);
  sol.x = Vec(n);
  for (std::size_t j = 0; j < n; ++j) {
    sol.x[j] = col_value[pos[j]];
    if (neg[j] != SIZE_MAX) sol.x[j] -= col_value[neg[j]];
  }
  sol.value = dot(p.objective, sol.x);
  sol.status = LpStatus::Optimal;
  return sol;
}

}  // namespace wdro
