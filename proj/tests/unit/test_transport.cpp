#include <cmath>
#include <limits>

#include "doctest.h"
#include "wdro/attack.hpp"
#include "wdro/error.hpp"
#include "wdro/harness.hpp"
#include "wdro/random.hpp"
#include "wdro/transport.hpp"

using namespace wdro;
using doctest::Approx;

TEST_CASE("canonical cost of explicit moves") {
  const Vec a{0.0, 0.0}, b{3.0, 4.0};
  const MovedMass moves[] = {{&a, 0, &b, 0, 0.5}};
  CHECK(canonical_cost(moves, NormKind::L2) == Approx(2.5));
  CHECK(canonical_cost(moves, NormKind::L1) == Approx(3.5));
  const MovedMass relabel[] = {{&a, 0, &b, 1, 0.5}};
  CHECK_THROWS_AS(canonical_cost(relabel, NormKind::L2), Error);
}

TEST_CASE("canonical cost of attack mixtures") {
  Rng rng(1);
  for (NormKind r : kAllNorms) {
    for (double kappa : {1.0, 2.0, 3.0}) {
      const double eps = 0.2;
      AdvDistribution d;
      d.kappa = kappa;
      d.epsilon = eps;
      d.r = r;
      for (std::size_t i = 0; i < 5; ++i) {
        Vec x{rng.normal(), rng.normal()};
        Vec dir{rng.normal(), rng.normal()};
        dir = (kappa * eps / vec_norm(dir, r)) * dir;
        d.pairs.push_back({i, {x, i % 2}, x + dir});
      }
      // Every adversarial point on the kappa*eps sphere: cost (1/kappa) * kappa * eps.
      CHECK(canonical_cost(d, r) == Approx(eps).epsilon(1e-12));
      // The canonical coupling is an upper bound on W1.
      std::vector<LabeledSample> anchors;
      for (const auto& p : d.pairs) anchors.push_back(p.anchor);
      CHECK(exact_w1_small(empirical(anchors), to_discrete(d), r) <= canonical_cost(d, r) + 1e-12);
    }
  }

  AdvDistribution same;
  same.kappa = 1.0;
  same.pairs.push_back({0, {Vec{1.0}, 0}, Vec{1.0}});
  CHECK(canonical_cost(same, NormKind::L2) == 0.0);
}

TEST_CASE("exact W1 examples") {
  DiscreteDist p{{{Vec{0.0}, 0, 0.5}, {Vec{1.0}, 0, 0.5}}};
  CHECK(exact_w1_small(p, p, NormKind::L2) == 0.0);
  const double t = 0.3;
  DiscreteDist q{{{Vec{t}, 0, 0.5}, {Vec{1.0 + t}, 0, 0.5}}};
  CHECK(exact_w1_small(p, q, NormKind::L2) == Approx(t));
  DiscreteDist relabeled{{{Vec{0.0}, 1, 0.5}, {Vec{1.0}, 0, 0.5}}};
  CHECK(exact_w1_small(p, relabeled, NormKind::L2) == std::numeric_limits<double>::infinity());
}

TEST_CASE("exact W1 matches the one-dimensional quantile formula") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.index(8), m = 1 + rng.index(8);
    std::vector<double> xp(n), wp(n), xq(m), wq(m);
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xp[i] = rng.normal();
      wp[i] = rng.uniform(0.1, 1.0);
      sp += wp[i];
    }
    for (std::size_t i = 0; i < m; ++i) {
      xq[i] = rng.normal();
      wq[i] = rng.uniform(0.1, 1.0);
      sq += wq[i];
    }
    DiscreteDist p, q;
    for (std::size_t i = 0; i < n; ++i) p.atoms.push_back({Vec{xp[i]}, 0, wp[i] / sp});
    for (std::size_t i = 0; i < m; ++i) q.atoms.push_back({Vec{xq[i]}, 0, wq[i] / sq});
    for (auto& w : wp) w /= sp;
    for (auto& w : wq) w /= sq;
    const double expect = w1_1d(xp, wp, xq, wq);
    for (NormKind r : kAllNorms) CHECK(exact_w1_small(p, q, r) == Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("optimal coupling conserves mass") {
  DiscreteDist p{{{Vec{0.0, 0.0}, 0, 0.25}, {Vec{1.0, 0.0}, 0, 0.25}, {Vec{0.0, 1.0}, 1, 0.5}}};
  DiscreteDist q{{{Vec{0.5, 0.0}, 0, 0.5}, {Vec{0.0, 2.0}, 1, 0.5}}};
  const auto c = optimal_coupling(p, q, NormKind::L1);
  CHECK(c.cost == Approx(0.25 * 0.5 + 0.25 * 0.5 + 0.5 * 1.0));
  double total = 0.0;
  for (const auto& f : c.flows) {
    CHECK(p.atoms[f.from].y == q.atoms[f.to].y);
    total += f.mass;
  }
  CHECK(total == Approx(1.0));

  DiscreteDist big;
  for (std::size_t i = 0; i <= kMaxExactAtoms; ++i) big.atoms.push_back({Vec{double(i)}, 0, 1.0 / (kMaxExactAtoms + 1)});
  CHECK_THROWS_AS(exact_w1_small(big, big, NormKind::L2), Error);
}

TEST_CASE("distribution validation") {
  DiscreteDist bad{{{Vec{0.0}, 0, 0.7}}};
  CHECK_THROWS_AS(bad.validate(), Error);
  DiscreteDist neg{{{Vec{0.0}, 0, 1.5}, {Vec{1.0}, 0, -0.5}}};
  CHECK_THROWS_AS(neg.validate(), Error);
  const auto e = empirical(gen_data({.samples = 4}, 1));
  CHECK_NOTHROW(e.validate());
  CHECK(e.atoms[0].weight == Approx(0.25));
}
