#include "wdro/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wdro/error.hpp"

namespace wdro {

std::string_view to_string(ActivationKind a) {
  switch (a) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::GELU: return "gelu";
    case ActivationKind::SiLU: return "silu";
  }
  return "?";
}

ActivationKind parse_activation(std::string_view text) {
  if (text == "relu") return ActivationKind::ReLU;
  if (text == "gelu") return ActivationKind::GELU;
  if (text == "silu") return ActivationKind::SiLU;
  throw Error(ErrorCode::InvalidArgument, "unknown activation '" + std::string(text) + "'");
}

namespace {
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
}  // namespace

double activate(ActivationKind a, double z) {
  switch (a) {
    case ActivationKind::ReLU: return z > 0.0 ? z : 0.0;
    case ActivationKind::GELU: return z * normal_cdf(z);
    case ActivationKind::SiLU: return z * sigmoid(z);
  }
  return z;
}

double activate_derivative(ActivationKind a, double z) {
  switch (a) {
    case ActivationKind::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case ActivationKind::GELU: return normal_cdf(z) + z * normal_pdf(z);
    case ActivationKind::SiLU: {
      const double s = sigmoid(z);
      return s * (1.0 + z * (1.0 - s));
    }
  }
  return 1.0;
}

bool Box::contains(const Vec& x, double slack) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  return true;
}

Vec Box::clamp(const Vec& x) const {
  Vec out = x;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], lo[i], hi[i]);
  return out;
}

double Box::width() const {
  double w = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) w = std::max(w, hi[i] - lo[i]);
  return w;
}

Mlp::Mlp(std::vector<Layer> layers, ActivationKind activation, Box domain)
    : layers_(std::move(layers)), activation_(activation), domain_(std::move(domain)) {
  if (layers_.empty()) throw Error(ErrorCode::ShapeMismatch, "network needs at least one layer");
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    const auto& l = layers_[h];
    if (l.weight.rows() == 0 || l.weight.cols() == 0)
      throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(h + 1) + " is empty");
    if (l.bias.size() != l.weight.rows())
      throw Error(ErrorCode::ShapeMismatch,
                  "layer " + std::to_string(h + 1) + " bias length differs from weight rows");
    if (h > 0 && l.weight.cols() != layers_[h - 1].weight.rows())
      throw Error(ErrorCode::ShapeMismatch,
                  "layer " + std::to_string(h + 1) + " input width does not chain");
  }
  if (domain_.lo.size() != input_dim() || domain_.hi.size() != input_dim())
    throw Error(ErrorCode::ShapeMismatch, "domain box dimension differs from input dimension");
  for (std::size_t i = 0; i < input_dim(); ++i)
    if (!(domain_.lo[i] <= domain_.hi[i]))
      throw Error(ErrorCode::InvalidArgument, "domain box has lo > hi");
}

std::size_t Mlp::hidden_units() const {
  std::size_t total = 0;
  for (std::size_t h = 0; h < hidden_layers(); ++h) total += hidden_width(h);
  return total;
}

std::string Mask::key() const {
  std::string out;
  for (std::size_t h = 0; h < diags.size(); ++h) {
    if (h) out.push_back('|');
    for (auto d : diags[h]) out.push_back(d ? '1' : '0');
  }
  return out;
}

Mask Mask::parse(std::string_view key) {
  Mask m;
  if (key.empty()) return m;
  m.diags.emplace_back();
  for (char c : key) {
    if (c == '|') m.diags.emplace_back();
    else if (c == '0' || c == '1') m.diags.back().push_back(c == '1');
    else throw Error(ErrorCode::Parse, "mask key has character '" + std::string(1, c) + "'");
  }
  return m;
}

Mask Mask::all(const Mlp& net, std::uint8_t value) {
  Mask m;
  for (std::size_t h = 0; h < net.hidden_layers(); ++h)
    m.diags.emplace_back(net.hidden_width(h), value);
  return m;
}

namespace {

void check_input(const Mlp& net, const Vec& x) {
  if (x.size() != net.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "input has dimension " + std::to_string(x.size()) +
                                                  ", network expects " +
                                                  std::to_string(net.input_dim()));
}

void check_mask(const Mlp& net, const Mask& mask) {
  if (mask.diags.size() != net.hidden_layers())
    throw Error(ErrorCode::ShapeMismatch, "mask layer count differs from hidden layer count");
  for (std::size_t h = 0; h < mask.diags.size(); ++h)
    if (mask.diags[h].size() != net.hidden_width(h))
      throw Error(ErrorCode::ShapeMismatch, "mask width differs at hidden layer " +
                                                std::to_string(h + 1));
}

Vec affine(const Layer& l, const Vec& a) {
  Vec z = l.weight * a;
  z += l.bias;
  return z;
}

}  // namespace

Vec forward(const Mlp& net, const Vec& x) {
  check_input(net, x);
  Vec a = x;
  const auto& layers = net.layers();
  for (std::size_t h = 0; h + 1 < layers.size(); ++h) {
    a = affine(layers[h], a);
    for (double& v : a) v = activate(net.activation(), v);
  }
  return affine(layers.back(), a);
}

std::vector<Vec> pre_activations(const Mlp& net, const Vec& x) {
  check_input(net, x);
  std::vector<Vec> out;
  Vec a = x;
  const auto& layers = net.layers();
  for (std::size_t h = 0; h + 1 < layers.size(); ++h) {
    Vec z = affine(layers[h], a);
    a = z;
    for (double& v : a) v = activate(net.activation(), v);
    out.push_back(std::move(z));
  }
  return out;
}

MaskAt mask_at(const Mlp& net, const Vec& x) {
  if (net.activation() != ActivationKind::ReLU)
    throw Error(ErrorCode::WrongActivation, "activation masks are defined for ReLU nets only");
  MaskAt out;
  for (const Vec& pre : pre_activations(net, x)) {
    auto& diag = out.mask.diags.emplace_back(pre.size());
    for (std::size_t j = 0; j < pre.size(); ++j) {
      diag[j] = pre[j] > 0.0;
      if (std::fabs(pre[j]) <= kDegenerateThreshold) out.degenerate = true;
    }
  }
  return out;
}

Mat masked_jacobian(const Mlp& net, const Mask& mask) {
  if (net.activation() != ActivationKind::ReLU)
    throw Error(ErrorCode::WrongActivation, "masked Jacobians are defined for ReLU nets only");
  check_mask(net, mask);
  const auto& layers = net.layers();
  Mat j = layers.front().weight;
  for (std::size_t h = 0; h < mask.diags.size(); ++h) {
    std::vector<double> d(mask.diags[h].begin(), mask.diags[h].end());
    j = layers[h + 1].weight * scale_rows(j, d);
  }
  return j;
}

GeneralJacobian general_jacobian(const Mlp& net, const Vec& x) {
  check_input(net, x);
  const auto& layers = net.layers();
  if (net.activation() == ActivationKind::ReLU) {
    const MaskAt m = mask_at(net, x);
    return {masked_jacobian(net, m.mask), m.degenerate};
  }
  Mat j = layers.front().weight;
  Vec a = x;
  for (std::size_t h = 0; h + 1 < layers.size(); ++h) {
    const Vec z = affine(layers[h], a);
    std::vector<double> d(z.size());
    a = z;
    for (std::size_t i = 0; i < z.size(); ++i) {
      d[i] = activate_derivative(net.activation(), z[i]);
      a[i] = activate(net.activation(), z[i]);
    }
    j = layers[h + 1].weight * scale_rows(j, d);
  }
  return {std::move(j), false};
}

Mat jacobian(const Mlp& net, const Vec& x) {
  GeneralJacobian g = general_jacobian(net, x);
  if (g.degenerate)
    throw Error(ErrorCode::DegeneratePoint, "input lies on a ReLU kink; Jacobian is not unique");
  return std::move(g.jacobian);
}

std::size_t argmax(const Vec& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace wdro
