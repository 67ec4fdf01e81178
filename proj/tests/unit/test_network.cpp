#include <cmath>

#include "criteria/oracles.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "wdro/error.hpp"
#include "wdro/harness.hpp"
#include "wdro/network.hpp"
#include "wdro/random.hpp"

using namespace wdro;
using doctest::Approx;

TEST_CASE("forward on the absolute-value net") {
  const Mlp net = fixtures::abs_net();
  CHECK(forward(net, Vec{2.0}) == Vec{2.0});
  CHECK(forward(net, Vec{-3.0}) == Vec{3.0});
  CHECK_THROWS_AS(forward(net, Vec{1.0, 2.0}), Error);
}

TEST_CASE("pre-activations") {
  const Mlp net = fixtures::abs_net();
  const auto pre = pre_activations(net, Vec{2.0});
  REQUIRE(pre.size() == 1);
  CHECK(pre[0] == Vec{2.0, -2.0});
  const auto kink = pre_activations(net, Vec{0.0});
  CHECK(kink[0] == Vec{0.0, 0.0});
  CHECK(pre_activations(fixtures::linear_net(Mat::identity(2)), Vec{1.0, 1.0}).empty());
}

TEST_CASE("activation masks") {
  const Mlp net = fixtures::abs_net();
  auto m = mask_at(net, Vec{2.0});
  CHECK(m.mask.key() == "10");
  CHECK_FALSE(m.degenerate);
  CHECK(mask_at(net, Vec{0.0}).degenerate);
  CHECK(mask_at(net, Vec{0.0}).mask.key() == "00");
  CHECK(mask_at(net, Vec{-1.0}).mask.key() == "01");
  CHECK(Mask::parse("101|01").key() == "101|01");
}

TEST_CASE("masked Jacobians") {
  const Mlp net = fixtures::abs_net();
  CHECK(masked_jacobian(net, Mask::parse("10")) == Mat::from_rows({{1.0}}));
  CHECK(masked_jacobian(net, Mask::parse("01")) == Mat::from_rows({{-1.0}}));
  CHECK(masked_jacobian(net, Mask::all(net, 0)) == Mat(1, 1));
  CHECK(masked_jacobian(net, Mask::all(net, 1)) == Mat::from_rows({{0.0}}));

  ModelSpec spec;
  spec.hidden = {4, 3};
  const Mlp deep = gen_model(spec, 4);
  const auto& L = deep.layers();
  CHECK(masked_jacobian(deep, Mask::all(deep, 1)) == L[2].weight * (L[1].weight * L[0].weight));
}

TEST_CASE("Jacobians match finite differences for every activation") {
  const Mat w = Mat::from_rows({{1.0, -2.0}, {0.5, 3.0}, {2.0, 2.0}});
  CHECK(jacobian(fixtures::linear_net(w), Vec{0.3, -0.1}) == w);

  Rng rng(8);
  for (ActivationKind act : {ActivationKind::ReLU, ActivationKind::GELU, ActivationKind::SiLU}) {
    ModelSpec spec;
    spec.input_dim = 3;
    spec.output_dim = 3;
    spec.hidden = {6, 5};
    spec.activation = act;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Mlp net = gen_model(spec, seed);
      for (int t = 0; t < 10; ++t) {
        const Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Vec fwd = forward(net, x), naive = oracle::naive_forward(net, x);
        for (std::size_t k = 0; k < fwd.size(); ++k) CHECK(fwd[k] == Approx(naive[k]).epsilon(1e-12));
        const Mat j = jacobian(net, x);
        const Mat fd = oracle::fd_jacobian(net, x, 1e-6);
        for (std::size_t r = 0; r < j.rows(); ++r)
          for (std::size_t c = 0; c < j.cols(); ++c) CHECK(j(r, c) == Approx(fd(r, c)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("ReLU Jacobian at a kink") {
  const Mlp net = fixtures::abs_net();
  CHECK_THROWS_AS(jacobian(net, Vec{0.0}), Error);
  const auto g = general_jacobian(net, Vec{0.0});
  CHECK(g.degenerate);
  CHECK(g.jacobian == Mat(1, 1));
}

TEST_CASE("construction validates shapes") {
  std::vector<Layer> layers;
  layers.push_back({Mat(3, 2), Vec(3)});
  layers.push_back({Mat(2, 4), Vec(2)});
  CHECK_THROWS_AS(Mlp(layers, ActivationKind::ReLU, fixtures::box(2, -1, 1)), Error);
}

TEST_CASE("argmax takes the lowest index on ties") {
  CHECK(argmax(Vec{1.0, 3.0, 3.0}) == 1);
  CHECK(argmax(Vec{0.0}) == 0);
}
