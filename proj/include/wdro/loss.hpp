#pragma once
// Classification losses on logits.

#include <cstddef>
#include <string_view>

#include "wdro/linalg.hpp"

namespace wdro {

enum class LossKind {
  CrossEntropy,
  /// Unnormalized margin max_{j != k} z_j - z_k (not the ratio-normalized DLR).
  DLRMargin,
};

std::string_view to_string(LossKind kind);
LossKind parse_loss(std::string_view text);

double loss(LossKind kind, const Vec& logits, std::size_t k);

/// d loss / d logits. CE: softmax(z) - e_k. DLR: e_{j*} - e_k, j* the
/// lowest-index argmax over j != k.
Vec loss_logit_gradient(LossKind kind, const Vec& logits, std::size_t k);

/// 2^{1/s} (2 for L1, sqrt 2 for L2, 1 for LInf): the bound on
/// ||loss_logit_gradient||_s. As a Lipschitz modulus of the loss w.r.t.
/// ||.||_s on logits the right factor is sensitivity_factor(dual(s)).
double sensitivity_factor(NormKind s);

/// lim_{a->inf} (loss(z + a v) - loss(z)) / a for logit velocity v.
/// CE: max_i v_i - v_k. DLR: max_{i != k} v_i - v_k.
double asymptotic_rate(LossKind kind, const Vec& v, std::size_t k);

Vec softmax(const Vec& logits);
double log_sum_exp(const Vec& logits);

}  // namespace wdro
