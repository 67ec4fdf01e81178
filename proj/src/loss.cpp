#include "wdro/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wdro/error.hpp"

namespace wdro {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::CrossEntropy ? "ce" : "dlr";
}

LossKind parse_loss(std::string_view text) {
  if (text == "ce") return LossKind::CrossEntropy;
  if (text == "dlr") return LossKind::DLRMargin;
  throw Error(ErrorCode::InvalidArgument, "unknown loss '" + std::string(text) + "'");
}

namespace {

void check_class(const Vec& logits, std::size_t k) {
  if (k >= logits.size())
    throw Error(ErrorCode::InvalidArgument, "class index " + std::to_string(k) +
                                                " out of range for " +
                                                std::to_string(logits.size()) + " logits");
}

// Lowest-index argmax over j != k.
std::size_t best_rival(const Vec& z, std::size_t k) {
  std::size_t best = k == 0 ? 1 : 0;
  for (std::size_t j = 0; j < z.size(); ++j)
    if (j != k && z[j] > z[best]) best = j;
  return best;
}

}  // namespace

double log_sum_exp(const Vec& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double acc = 0.0;
  for (double v : z) acc += std::exp(v - m);
  return m + std::log(acc);
}

Vec softmax(const Vec& z) {
  const double m = *std::max_element(z.begin(), z.end());
  Vec p(z.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += (p[i] = std::exp(z[i] - m));
  p *= 1.0 / acc;
  return p;
}

double loss(LossKind kind, const Vec& logits, std::size_t k) {
  check_class(logits, k);
  if (kind == LossKind::CrossEntropy) return log_sum_exp(logits) - logits[k];
  if (logits.size() < 2) throw Error(ErrorCode::InvalidArgument, "DLR margin needs K >= 2");
  return logits[best_rival(logits, k)] - logits[k];
}

Vec loss_logit_gradient(LossKind kind, const Vec& logits, std::size_t k) {
  check_class(logits, k);
  if (kind == LossKind::CrossEntropy) {
    Vec g = softmax(logits);
    g[k] -= 1.0;
    return g;
  }
  if (logits.size() < 2) throw Error(ErrorCode::InvalidArgument, "DLR margin needs K >= 2");
  Vec g(logits.size());
  g[best_rival(logits, k)] = 1.0;
  g[k] = -1.0;
  return g;
}

double sensitivity_factor(NormKind s) {
  switch (s) {
    case NormKind::L1: return 2.0;
    case NormKind::L2: return std::numbers::sqrt2;
    case NormKind::LInf: return 1.0;
  }
  return 1.0;
}

double asymptotic_rate(LossKind kind, const Vec& v, std::size_t k) {
  check_class(v, k);
  if (kind == LossKind::CrossEntropy) return *std::max_element(v.begin(), v.end()) - v[k];
  if (v.size() < 2) throw Error(ErrorCode::InvalidArgument, "DLR margin needs K >= 2");
  return v[best_rival(v, k)] - v[k];
}

}  // namespace wdro
