#pragma once
// Small fully connected classifiers x -> logits with ReLU, GELU or SiLU
// hidden activations, plus the activation-pattern machinery for ReLU nets.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wdro/linalg.hpp"

namespace wdro {

enum class ActivationKind { ReLU, GELU, SiLU };

std::string_view to_string(ActivationKind a);
ActivationKind parse_activation(std::string_view text);

double activate(ActivationKind a, double z);
double activate_derivative(ActivationKind a, double z);

struct Layer {
  Mat weight;
  Vec bias;
};

/// Axis-aligned input domain [lo, hi].
struct Box {
  Vec lo;
  Vec hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(const Vec& x, double slack = 0.0) const;
  Vec clamp(const Vec& x) const;
  /// Largest side length.
  double width() const;
};

/// theta(x) = W_{H+1}(act(... act(W_1 x + b_1) ...)) + b_{H+1}.
/// Immutable after construction; the constructor validates the shape chain.
class Mlp {
 public:
  Mlp(std::vector<Layer> layers, ActivationKind activation, Box domain);

  std::size_t input_dim() const { return layers_.front().weight.cols(); }
  std::size_t output_dim() const { return layers_.back().weight.rows(); }
  std::size_t hidden_layers() const { return layers_.size() - 1; }
  std::size_t hidden_width(std::size_t h) const { return layers_[h].weight.rows(); }
  std::size_t hidden_units() const;
  ActivationKind activation() const { return activation_; }
  const Box& domain() const { return domain_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
  ActivationKind activation_;
  Box domain_;
};

/// One 0/1 diagonal per hidden layer.
struct Mask {
  std::vector<std::vector<std::uint8_t>> diags;

  /// Layers joined by '|', e.g. "1010|01".
  std::string key() const;
  static Mask parse(std::string_view key);
  static Mask all(const Mlp& net, std::uint8_t value);

  friend bool operator==(const Mask&, const Mask&) = default;
  friend auto operator<=>(const Mask&, const Mask&) = default;
};

struct LabeledSample {
  Vec x;
  std::size_t y = 0;
};

/// |pre| at or below this is treated as lying on a cell boundary.
inline constexpr double kDegenerateThreshold = 1e-12;

Vec forward(const Mlp& net, const Vec& x);

/// Pre-nonlinearity values W_h a_{h-1} + b_h for h = 1..H.
std::vector<Vec> pre_activations(const Mlp& net, const Vec& x);

struct MaskAt {
  Mask mask;
  bool degenerate = false;
};

/// diags[h][j] = 1 iff pre_h(x)_j > 0. ReLU nets only.
MaskAt mask_at(const Mlp& net, const Vec& x);

/// J_D = W_{H+1} D_H W_H ... D_1 W_1.
Mat masked_jacobian(const Mlp& net, const Mask& mask);

/// Exact input Jacobian. For ReLU nets throws DegeneratePoint on a kink.
Mat jacobian(const Mlp& net, const Vec& x);

/// Jacobian that never throws for ReLU: on a kink it uses the mask from
/// mask_at (exact zeros resolve to inactive) and reports degenerate = true.
struct GeneralJacobian {
  Mat jacobian;
  bool degenerate = false;
};
GeneralJacobian general_jacobian(const Mlp& net, const Vec& x);

/// Index of the largest logit, lowest index on ties.
std::size_t argmax(const Vec& v);

}  // namespace wdro
