#include <cmath>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "wdro/certify.hpp"
#include "wdro/error.hpp"
#include "wdro/harness.hpp"
#include "wdro/transport.hpp"

using namespace wdro;
using doctest::Approx;

namespace {

MaskInventory exhaustive_inventory(const Mlp& net) {
  return enumerate_masks(net, {}, net.domain(), {.probes = 0, .exhaustive_cap = 16, .seed = 1});
}

/// Hidden (ReLU(x), ReLU(1 - x)) and logits (h1 - h2, 0): slope 2 on the
/// bounded cell (0, 1), slope 1 on the two unbounded cells.
Mlp bounded_steep_cell_net() {
  std::vector<Layer> layers;
  layers.push_back({Mat::from_rows({{1.0}, {-1.0}}), Vec{0.0, 1.0}});
  layers.push_back({Mat::from_rows({{1.0, -1.0}, {0.0, 0.0}}), Vec{0.0, 0.0}});
  return Mlp(std::move(layers), ActivationKind::ReLU, fixtures::box(1, -5, 5));
}

}  // namespace

TEST_CASE("mask inventory is duplicate free and ordered") {
  MaskInventory inv;
  CHECK(inv.add(Mask::parse("10"), Provenance::Dataset));
  CHECK(inv.add(Mask::parse("01"), Provenance::RandomProbe));
  CHECK_FALSE(inv.add(Mask::parse("10"), Provenance::Exhaustive));
  CHECK(inv.size() == 2);
  CHECK(inv[0].mask.key() == "10");
  CHECK(inv[1].provenance == Provenance::RandomProbe);
  CHECK(inv.contains(Mask::parse("01")));
  CHECK_FALSE(inv.contains(Mask::parse("11")));
}

TEST_CASE("feasible masks of the absolute-value net") {
  const Mlp net = fixtures::abs_net();
  const auto masks = enumerate_feasible_masks(net, net.domain());
  REQUIRE(masks.size() == 2);
  CHECK(masks[0].key() == "01");
  CHECK(masks[1].key() == "10");

  const auto none = enumerate_masks(net, {}, net.domain(), {.probes = 0, .exhaustive_cap = 0, .seed = 1});
  CHECK(none.empty());
  CHECK_FALSE(none.exhaustive);
  const auto all = exhaustive_inventory(net);
  CHECK(all.size() == 2);
  CHECK(all.exhaustive);
}

TEST_CASE("exhaustive enumeration covers every sampled pattern") {
  ModelSpec spec;
  spec.hidden = {5, 4};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Mlp net = gen_model(spec, seed);
    const auto inv = exhaustive_inventory(net);
    const auto probed = enumerate_masks(net, {}, net.domain(), {.probes = 3000, .exhaustive_cap = 0, .seed = seed});
    for (const auto& e : probed.entries()) CHECK(inv.contains(e.mask));
    CHECK(inv.size() >= probed.size());
  }
}

TEST_CASE("upper bound examples") {
  const Mat w = Mat::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const Mlp lin = fixtures::linear_net(w);
  const auto up = upper_bound_L(lin, exhaustive_inventory(lin), NormKind::L1, NormKind::LInf);
  REQUIRE(up.op_norms.size() == 1);
  CHECK(up.op_norms[0] == Approx(4.0));
  // Lipschitz factor 2 for s = LInf: L = 2 * 4.
  CHECK(up.value == Approx(8.0));
  CHECK(up.certified);

  const Mlp abs = fixtures::abs_net();
  CHECK(upper_bound_L(abs, exhaustive_inventory(abs), NormKind::L2, NormKind::L2).value == Approx(std::sqrt(2.0)));

  const Mlp zero = fixtures::linear_net(Mat(2, 2));
  CHECK(upper_bound_L(zero, exhaustive_inventory(zero), NormKind::L2, NormKind::L2).value == 0.0);
}

TEST_CASE("the 2^{1/s} factor would put L below l") {
  const Mlp net = fixtures::linear_net(Mat::from_rows({{1.0}, {-1.0}}));
  const auto inv = exhaustive_inventory(net);
  const double l = lower_bound_l(net, inv, NormKind::L1).value;
  const double op = op_norm(masked_jacobian(net, Mask{}), NormKind::L1, NormKind::LInf);
  CHECK(l == Approx(2.0));
  CHECK(sensitivity_factor(NormKind::LInf) * op == Approx(1.0));
  CHECK(upper_bound_L(net, inv, NormKind::L1, NormKind::LInf).value == Approx(2.0));
}

TEST_CASE("lower bound examples") {
  const Mlp net = fixtures::linear_net(Mat::from_rows({{1.0}, {-1.0}}));
  const auto low = lower_bound_l(net, exhaustive_inventory(net), NormKind::LInf);
  CHECK(low.value == Approx(2.0));
  REQUIRE(low.witness.has_value());
  // First pair visited: true class 0, rival 1, logit velocity (-1, 1) at u = -1.
  CHECK(low.witness->rival == 1);
  CHECK(low.witness->true_class == 0);
  CHECK(low.witness->u[0] == Approx(-1.0));

  const Mlp one = fixtures::abs_net();
  CHECK(lower_bound_l(one, exhaustive_inventory(one), NormKind::L2).value ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("practical lower bound on one sample") {
  // Logits (ReLU(x), ReLU(-x)); at x = 1 the cell is x > 0, J = [1; 0], cone u >= 0.
  const Mlp net = fixtures::abs_net_head(Mat::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  const std::vector<LabeledSample> rival_wins{{Vec{1.0}, 1}};
  CHECK(practical_lower_bound_lN(net, rival_wins, NormKind::L2).value == Approx(1.0));
  const std::vector<LabeledSample> true_wins{{Vec{1.0}, 0}};
  const auto lb = practical_lower_bound_lN(net, true_wins, NormKind::L2);
  CHECK(lb.value == Approx(0.0));
  CHECK(lb.per_entry[0].all_descent);

  CHECK_THROWS_AS(practical_lower_bound_lN(net, {}, NormKind::L2), Error);
  const std::vector<LabeledSample> kink{{Vec{0.0}, 0}};
  CHECK_THROWS_AS(practical_lower_bound_lN(net, kink, NormKind::L2), Error);
}

TEST_CASE("tightness on a linear net") {
  const Mlp net = fixtures::linear_net(Mat::from_rows({{1.0}, {-1.0}}));
  const auto inv = exhaustive_inventory(net);
  const auto up = upper_bound_L(net, inv, NormKind::LInf, NormKind::L1);
  const auto low = lower_bound_l(net, inv, NormKind::LInf);
  const auto t = check_tightness(net, inv, up, low, NormKind::LInf, NormKind::L1);
  CHECK(t.cone_membership);
  CHECK(t.largest_increment);
  CHECK(t.holds());
  CHECK(t.bounds_agree);
  CHECK(low.value == Approx(up.value));
}

TEST_CASE("tightness fails when the steepest cell is bounded") {
  const Mlp net = bounded_steep_cell_net();
  const auto inv = exhaustive_inventory(net);
  REQUIRE(inv.size() == 3);
  const auto up = upper_bound_L(net, inv, NormKind::LInf, NormKind::L1);
  const auto low = lower_bound_l(net, inv, NormKind::LInf);
  CHECK(up.value == Approx(2.0));
  CHECK(inv[up.argmax].mask.key() == "11");
  CHECK(low.value == Approx(1.0));
  const auto t = check_tightness(net, inv, up, low, NormKind::LInf, NormKind::L1);
  CHECK_FALSE(t.cone_membership);
  CHECK_FALSE(t.holds());
  CHECK_FALSE(t.bounds_agree);
}

TEST_CASE("worst-case distribution spends exactly the budget") {
  const Mlp net = fixtures::abs_net_head(Mat::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  const std::vector<LabeledSample> data{{Vec{1.0}, 1}, {Vec{-2.0}, 0}, {Vec{0.5}, 1}};
  const auto inv = exhaustive_inventory(net);
  const auto low = lower_bound_l(net, inv, NormKind::L2);
  const auto up = upper_bound_L(net, inv, NormKind::L2, NormKind::L2);
  REQUIRE(low.witness.has_value());
  for (double eps : {0.01, 0.1, 1.0}) {
    const auto wc = build_worst_case_distribution(net, data, LossKind::CrossEntropy, NormKind::L2, eps, *low.witness);
    CHECK(canonical_cost(wc, NormKind::L2) == Approx(eps).epsilon(1e-12));
    const double base = empirical_loss(net, data, LossKind::CrossEntropy);
    const double value = expected_loss(net, wc, LossKind::CrossEntropy);
    CHECK(value >= base + low.value * eps - 1e-6);
    CHECK(value <= base + up.value * eps + 1e-6);
    double total = 0.0;
    for (const auto& a : wc.atoms()) total += a.weight;
    CHECK(total == Approx(1.0));
  }
}

TEST_CASE("worst-case construction rejects a non-positive slope") {
  const Mlp net = fixtures::abs_net_head(Mat::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  const std::vector<LabeledSample> data{{Vec{1.0}, 0}};
  LowerWitness w;
  w.mask = Mask::parse("10");
  w.rival = 1;
  w.true_class = 0;
  w.u = Vec{1.0};
  w.value = 0.0;
  CHECK_THROWS_AS(build_worst_case_distribution(net, data, LossKind::CrossEntropy, NormKind::L2, 0.1, w), Error);
}

TEST_CASE("smooth bounds") {
  ModelSpec spec;
  spec.hidden = {};
  spec.activation = ActivationKind::GELU;
  const Mlp lin = gen_model(spec, 3);
  const Mat w = lin.layers()[0].weight;
  const auto data = gen_data({.samples = 6}, 4);
  const auto sb = smooth_bounds(lin, data, lin.domain(), NormKind::L2, NormKind::L2);
  CHECK(sb.L_est == Approx(loss_lipschitz_factor(NormKind::L2) * op_norm(w, NormKind::L2, NormKind::L2)));
  CHECK(sb.l_est <= sb.L_est);

  spec.hidden = {6};
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Mlp net = gen_model(spec, seed);
    for (NormKind r : kAllNorms) {
      const auto b = smooth_bounds(net, data, net.domain(), r, dual(r), {.restarts = 2, .steps = 20});
      CHECK(b.l_est <= b.L_est);
    }
  }
  CHECK_THROWS_AS(smooth_bounds(fixtures::abs_net(), data, fixtures::box(1, -1, 1), NormKind::L2, NormKind::L2),
                  Error);
}

TEST_CASE("certify reports") {
  ModelSpec spec;
  spec.hidden = {6};
  const Mlp net = gen_model(spec, 5);
  const auto data = gen_data({.samples = 10}, 6);
  CertifyOptions opts;
  opts.r = NormKind::L2;
  opts.s = NormKind::L2;
  const auto rep = certify(net, data, opts);
  CHECK(rep.exhaustive);
  CHECK_FALSE(rep.estimate);
  CHECK(rep.l_lower <= rep.L_upper + 1e-12);
  CHECK(rep.l_N <= rep.l_lower + 1e-9);
  CHECK_FALSE(rep.per_mask.empty());

  opts.s = NormKind::L1;
  CHECK_THROWS_AS(certify(net, data, opts), Error);

  opts.s = NormKind::L2;
  opts.enumerate.exhaustive_cap = 0;
  const auto partial = certify(net, data, opts);
  CHECK(partial.estimate);
  CHECK(partial.L_upper <= rep.L_upper + 1e-12);
}

TEST_CASE("max pair increment") {
  const Mat j = Mat::from_rows({{1.0, 0.0}, {0.0, 2.0}, {-1.0, 1.0}});
  std::size_t rival = 9, truth = 9;
  // Row differences: r1 - r0 = (-1, 2) and r0 - r2 = (2, -1) reach 3; r1 - r2 = (1, 1) reaches 2.
  CHECK(max_pair_increment(j, NormKind::L1, &rival, &truth) == Approx(3.0));
  const Vec diff = Vec{j(rival, 0) - j(truth, 0), j(rival, 1) - j(truth, 1)};
  CHECK(vec_norm(diff, NormKind::L1) == Approx(3.0));
}
