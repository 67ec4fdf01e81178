#pragma once
// Wasserstein Distributional Attack: per-sample rival-probing ascent inside a
// kappa*eps ball, returned as a 2N-atom mixture of anchors (weight
// (1 - 1/kappa)/N) and adversarial points (weight 1/(kappa N)). kappa = 1 is a
// point-wise attack. A projected dual-norm PGD baseline shares the output type.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wdro/linalg.hpp"
#include "wdro/loss.hpp"
#include "wdro/network.hpp"

namespace wdro {

struct AttackConfig {
  double epsilon = 0.0;
  double kappa = 1.0;
  NormKind r = NormKind::LInf;
  /// Step length.
  double alpha = 0.0;
  /// Iterations that probe every rival; later iterations keep the last winner.
  std::size_t prob = 10;
  std::size_t maxiter = 20;
  /// Loss recorded in traces.
  LossKind loss = LossKind::CrossEntropy;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument unless eps >= 0, kappa >= 1, alpha > 0 and 0 < prob <= maxiter.
  void validate() const;
};

struct AdvPair {
  std::size_t anchor_index = 0;
  LabeledSample anchor;
  Vec adv;
};

struct AdvDistribution {
  std::vector<AdvPair> pairs;
  double kappa = 1.0;
  double epsilon = 0.0;
  NormKind r = NormKind::LInf;

  double anchor_weight() const;
  double adv_weight() const;
};

struct SampleTrace {
  std::vector<Vec> iterates;
  /// Winning rival per iteration (WDA) or the loss-gradient rival (PGD, DLR).
  std::vector<std::size_t> rivals;
  double final_loss = 0.0;
  /// max_{j != y} theta_j - theta_y at the final iterate.
  double final_margin = 0.0;
  /// Iterations whose ascent direction was zero.
  std::size_t stalls = 0;
  /// Iterations evaluated at a ReLU kink.
  std::size_t degenerate = 0;
};

struct AttackTrace {
  std::vector<SampleTrace> samples;
};

AdvDistribution wda(const Mlp& net, std::span<const LabeledSample> data, const AttackConfig& cfg,
                    AttackTrace* trace = nullptr);

/// x <- Proj_{r, X, eps}(x + step * M_r(grad_x loss)), starting at the anchor.
AdvDistribution pgd_baseline(const Mlp& net, std::span<const LabeledSample> data, LossKind kind,
                             double epsilon, NormKind r, double step, std::size_t iters,
                             AttackTrace* trace = nullptr);

struct Evaluation {
  double expected_loss = 0.0;
  /// (1 - 1/kappa) * clean + (1/kappa) * adversarial accuracy.
  double weighted_accuracy = 0.0;
  double clean_accuracy = 0.0;
  double adv_accuracy = 0.0;
};

Evaluation evaluate(const Mlp& net, const AdvDistribution& dist, LossKind kind);

/// max_{j != y} logits_j - logits_y.
double margin(const Vec& logits, std::size_t y);

}  // namespace wdro
