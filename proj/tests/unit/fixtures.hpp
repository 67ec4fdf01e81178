#pragma once
// Hand-built networks shared by the unit tests.

#include <vector>

#include "wdro/network.hpp"

namespace fixtures {

inline wdro::Box box(std::size_t n, double lo, double hi) {
  return {wdro::Vec(std::vector<double>(n, lo)), wdro::Vec(std::vector<double>(n, hi))};
}

/// theta(x) = ReLU(x) + ReLU(-x) = |x|, one logit.
inline wdro::Mlp abs_net(double lo = -5.0, double hi = 5.0) {
  std::vector<wdro::Layer> layers;
  layers.push_back({wdro::Mat::from_rows({{1.0}, {-1.0}}), wdro::Vec{0.0, 0.0}});
  layers.push_back({wdro::Mat::from_rows({{1.0, 1.0}}), wdro::Vec{0.0}});
  return wdro::Mlp(std::move(layers), wdro::ActivationKind::ReLU, box(1, lo, hi));
}

/// |x| hidden layer with a two-logit head.
inline wdro::Mlp abs_net_head(const wdro::Mat& head, double lo = -5.0, double hi = 5.0) {
  std::vector<wdro::Layer> layers;
  layers.push_back({wdro::Mat::from_rows({{1.0}, {-1.0}}), wdro::Vec{0.0, 0.0}});
  layers.push_back({head, wdro::Vec(head.rows())});
  return wdro::Mlp(std::move(layers), wdro::ActivationKind::ReLU, box(1, lo, hi));
}

/// Affine net with no hidden layer.
inline wdro::Mlp linear_net(const wdro::Mat& w, double lo = -1.0, double hi = 1.0) {
  std::vector<wdro::Layer> layers;
  layers.push_back({w, wdro::Vec(w.rows())});
  return wdro::Mlp(std::move(layers), wdro::ActivationKind::ReLU, box(w.cols(), lo, hi));
}

}  // namespace fixtures
