#pragma once
// Wasserstein-1 accounting with ground cost ||x' - x||_r plus an infinite
// penalty for changing labels.

#include <cstddef>
#include <span>
#include <vector>

#include "wdro/attack.hpp"
#include "wdro/certify.hpp"
#include "wdro/linalg.hpp"

namespace wdro {

struct Atom {
  Vec x;
  std::size_t y = 0;
  double weight = 0.0;
};

struct DiscreteDist {
  std::vector<Atom> atoms;
  /// Throws InvalidArgument on negative weights or a total differing from 1 by more than 1e-12.
  void validate() const;
};

DiscreteDist empirical(std::span<const LabeledSample> data);
DiscreteDist to_discrete(const AdvDistribution& dist);
DiscreteDist to_discrete(const WorstCaseDistribution& dist);

/// Mass moved from one atom to another under an explicit coupling.
struct MovedMass {
  const Vec* from = nullptr;
  std::size_t from_label = 0;
  const Vec* to = nullptr;
  std::size_t to_label = 0;
  double mass = 0.0;
};

/// Sum of mass * ||to - from||_r. Throws LabelMismatch when a move relabels.
double canonical_cost(std::span<const MovedMass> moves, NormKind r);
/// Each adversarial atom paired with its anchor: sum (1/(kappa N)) ||adv - X||_r.
double canonical_cost(const AdvDistribution& dist, NormKind r);
/// (eta / N) * ||perturbed - root||_r.
double canonical_cost(const WorstCaseDistribution& dist, NormKind r);

struct Flow {
  std::size_t from = 0;
  std::size_t to = 0;
  double mass = 0.0;
};

struct Coupling {
  std::vector<Flow> flows;
  /// +infinity when some label carries different mass on the two sides.
  double cost = 0.0;
};

inline constexpr std::size_t kMaxExactAtoms = 64;

/// Optimal coupling by one transportation LP per label. At most kMaxExactAtoms
/// atoms per side (DimensionTooLarge otherwise).
Coupling optimal_coupling(const DiscreteDist& p, const DiscreteDist& q, NormKind r);
double exact_w1_small(const DiscreteDist& p, const DiscreteDist& q, NormKind r);

/// W1 between weighted point sets on the real line: integral of |F_p - F_q|.
double w1_1d(std::span<const double> xp, std::span<const double> wp, std::span<const double> xq,
             std::span<const double> wq);

}  // namespace wdro
