#include <cmath>

#include "criteria/oracles.hpp"
#include "doctest.h"
#include "wdro/lp.hpp"
#include "wdro/random.hpp"

using namespace wdro;
using doctest::Approx;

TEST_CASE("small LPs") {
  LpProblem p;
  p.objective = Vec{1.0};
  p.constraints.push_back({Vec{1.0}, Relation::LessEq, 1.0});
  auto s = solve_lp(p);
  CHECK(s.status == LpStatus::Optimal);
  CHECK(s.value == Approx(1.0));

  LpProblem q;
  q.objective = Vec{1.0, 1.0};
  q.constraints.push_back({Vec{1.0, 1.0}, Relation::LessEq, 1.0});
  CHECK(solve_lp(q).value == Approx(1.0));
}

TEST_CASE("infeasible, unbounded and free variables") {
  LpProblem p;
  p.objective = Vec{1.0};
  p.constraints.push_back({Vec{1.0}, Relation::LessEq, -1.0});
  CHECK(solve_lp(p).status == LpStatus::Infeasible);

  LpProblem u;
  u.objective = Vec{1.0};
  u.constraints.push_back({Vec{-1.0}, Relation::LessEq, 1.0});
  CHECK(solve_lp(u).status == LpStatus::Unbounded);

  LpProblem f;
  f.objective = Vec{-1.0};
  f.free_vars = {true};
  f.constraints.push_back({Vec{1.0}, Relation::GreaterEq, -3.0});
  const auto s = solve_lp(f);
  CHECK(s.status == LpStatus::Optimal);
  CHECK(s.x[0] == Approx(-3.0));

  LpProblem e;
  e.objective = Vec{1.0, 2.0};
  e.constraints.push_back({Vec{1.0, 1.0}, Relation::Equal, 2.0});
  CHECK(solve_lp(e).value == Approx(4.0));
}

TEST_CASE("degenerate LP terminates") {
  // Classic cycling example for Dantzig's rule.
  LpProblem p;
  p.objective = Vec{0.75, -150.0, 0.02, -6.0};
  p.constraints.push_back({Vec{0.25, -60.0, -0.04, 9.0}, Relation::LessEq, 0.0});
  p.constraints.push_back({Vec{0.5, -90.0, -0.02, 3.0}, Relation::LessEq, 0.0});
  p.constraints.push_back({Vec{0.0, 0.0, 1.0, 0.0}, Relation::LessEq, 1.0});
  const auto s = solve_lp(p);
  CHECK(s.status == LpStatus::Optimal);
  CHECK(s.value == Approx(0.05));
}

TEST_CASE("random bounded LPs match vertex enumeration") {
  Rng rng(17);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.index(3);
    const std::size_t m = 1 + rng.index(5);
    LpProblem p;
    p.objective = Vec(n);
    for (auto& c : p.objective) c = rng.normal();
    std::vector<Vec> rows;
    std::vector<double> rhs;
    for (std::size_t i = 0; i < m; ++i) {
      Vec a(n);
      for (auto& v : a) v = rng.normal();
      const double b = rng.uniform(-1.0, 3.0);
      p.constraints.push_back({a, Relation::LessEq, b});
      rows.push_back(a);
      rhs.push_back(b);
    }
    // Box rows keep the oracle's region bounded; x >= 0 rows come from the LP convention.
    for (std::size_t j = 0; j < n; ++j) {
      Vec up = Vec::basis(n, j);
      p.constraints.push_back({up, Relation::LessEq, 5.0});
      rows.push_back(up);
      rhs.push_back(5.0);
      rows.push_back(-1.0 * Vec::basis(n, j));
      rhs.push_back(0.0);
    }
    bool feasible = false;
    const double expect = oracle::lp_vertex_max(p.objective, rows, rhs, &feasible);
    const auto s = solve_lp(p);
    if (!feasible) {
      CHECK(s.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.value == Approx(expect).epsilon(1e-8));
    CHECK(max_violation(p, s.x) <= 1e-9);
    ++checked;
  }
  CHECK(checked > 100);
}
