#pragma once
// Wasserstein-DRO certificate sandwich for small classifiers:
//
//   E_PN[loss] + l * eps  <=  sup_{W1(P, PN) <= eps} E_P[loss]  <=  E_PN[loss] + L * eps
//
// For ReLU nets L and l are maxima over activation masks (upper: induced
// operator norms of the masked Jacobians; lower: linear maximization over the
// recession cone of each cell). For smooth nets both are estimated by
// multi-start ascent over the input box.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdro/cells.hpp"
#include "wdro/linalg.hpp"
#include "wdro/loss.hpp"
#include "wdro/network.hpp"

namespace wdro {

enum class Provenance { Dataset, RandomProbe, Exhaustive };
std::string_view to_string(Provenance p);

struct InventoryEntry {
  Mask mask;
  Provenance provenance = Provenance::Dataset;
};

/// Duplicate-free, insertion-ordered set of feasible masks.
class MaskInventory {
 public:
  /// False if the mask is already present.
  bool add(Mask mask, Provenance provenance);
  bool contains(const Mask& mask) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<InventoryEntry>& entries() const { return entries_; }
  const InventoryEntry& operator[](std::size_t i) const { return entries_[i]; }

  /// True when every feasible pattern was enumerated.
  bool exhaustive = false;

 private:
  std::vector<InventoryEntry> entries_;
  std::vector<std::string> sorted_keys_;
};

struct EnumerateOptions {
  std::size_t probes = 0;
  /// Exhaustive enumeration runs only when the net has at most this many hidden units.
  std::size_t exhaustive_cap = 16;
  std::uint64_t seed = 1;
};

MaskInventory enumerate_masks(const Mlp& net, std::span<const LabeledSample> data,
                              const Box& box, const EnumerateOptions& opts);

/// Every feasible mask of the net over the box, depth-first with pruning.
std::vector<Mask> enumerate_feasible_masks(const Mlp& net, const Box& box);

/// Lipschitz modulus of the loss with respect to ||.||_s on the logits:
/// sup ||loss_logit_gradient||_{dual(s)} = sensitivity_factor(dual(s)).
double loss_lipschitz_factor(NormKind s);

struct UpperBound {
  double value = 0.0;
  std::size_t argmax = 0;
  std::vector<double> op_norms;
  /// Only a certificate when computed over an exhaustive inventory.
  bool certified = false;
};

/// L = loss_lipschitz_factor(s) * max_D ||J_D||_{r->s}.
UpperBound upper_bound_L(const Mlp& net, const MaskInventory& inv, NormKind r, NormKind s);

struct LowerWitness {
  Mask mask;
  std::size_t mask_index = 0;
  std::size_t rival = 0;
  std::size_t true_class = 0;
  Vec u;
  double value = -std::numeric_limits<double>::infinity();
  /// Set for the dataset-restricted bound.
  std::optional<std::size_t> sample;
};

struct MaskSlope {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t rival = 0;
  std::size_t true_class = 0;
  Vec u;
  bool all_descent = false;
};

struct LowerBound {
  /// -infinity when no class pair or no feasible cone exists.
  double value = -std::numeric_limits<double>::infinity();
  std::optional<LowerWitness> witness;
  /// Best pair per inventory entry (lower_bound_l) or per sample (practical bound).
  std::vector<MaskSlope> per_entry;
  std::size_t skipped_degenerate = 0;
};

/// l = max over masks and ordered class pairs k' != k of
/// max { (e_k' - e_k)^T J_D u : u in rec(C_D), ||u||_r <= 1 }.
LowerBound lower_bound_l(const Mlp& net, const MaskInventory& inv, NormKind r);

/// l_N: same inner problem restricted to the dataset masks, rivals against the
/// true label, and the interior of the recession cone.
LowerBound practical_lower_bound_lN(const Mlp& net, std::span<const LabeledSample> data,
                                    NormKind r);

struct TightnessCheck {
  std::size_t upper_mask = 0;
  std::size_t rival = 0;
  std::size_t true_class = 0;
  /// M_r(J_D*^T (e_k'* - e_k*)) lies in rec(C_D*) within 1e-9.
  bool cone_membership = false;
  /// (e_k'* - e_k*) attains the largest pair increment of J_D* and that
  /// increment equals loss_lipschitz_factor(s) * ||J_D*||_{r->s}.
  bool largest_increment = false;
  bool holds() const { return cone_membership && largest_increment; }
  /// |l - L| <= 1e-6 * max(1, L).
  bool bounds_agree = false;
};

TightnessCheck check_tightness(const Mlp& net, const MaskInventory& inv, const UpperBound& upper,
                               const LowerBound& lower, NormKind r, NormKind s);

/// Mixture that moves mass eta/N of one root sample far along a cell ray.
struct WorstCaseDistribution {
  std::vector<LabeledSample> base;
  std::size_t root = 0;
  LabeledSample perturbed;
  double eta = 0.0;
  double epsilon = 0.0;
  NormKind r = NormKind::L2;
  Vec ray_origin;
  Vec ray_direction;
  double alpha = 0.0;
  /// d(perturbed, root) = ||perturbed.x - base[root].x||_r.
  double distance = 0.0;
  /// slope - (loss(perturbed) - loss(root)) / distance: the shortfall against
  /// the witness slope at this alpha.
  double slope_shortfall = 0.0;

  struct Atom {
    Vec x;
    std::size_t y;
    double weight;
  };
  std::vector<Atom> atoms() const;
};

inline constexpr double kDefaultAlphaSchedule[] = {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};

/// Throws NoRootSample, CellEscape, or NonPositiveSlope (witness slope <= 0:
/// no ray increases the loss and PN itself is the better lower certificate).
WorstCaseDistribution build_worst_case_distribution(
    const Mlp& net, std::span<const LabeledSample> data, LossKind loss_kind, NormKind r,
    double epsilon, const LowerWitness& witness,
    std::span<const double> alpha_schedule = kDefaultAlphaSchedule);

double expected_loss(const Mlp& net, const WorstCaseDistribution& dist, LossKind kind);
double empirical_loss(const Mlp& net, std::span<const LabeledSample> data, LossKind kind);

struct SmoothBoundOptions {
  std::size_t restarts = 8;
  std::size_t steps = 200;
  std::uint64_t seed = 7;
  double fd_step = 1e-5;
};

struct SmoothBounds {
  double L_est = 0.0;
  double l_est = 0.0;
  Vec argmax_L;
  Vec argmax_l;
};

/// Heuristic estimates of the smooth-network slopes by projected ascent with
/// finite-difference gradients. Both objectives are recorded at every visited
/// point, so l_est <= L_est always holds.
SmoothBounds smooth_bounds(const Mlp& net, std::span<const LabeledSample> data, const Box& box,
                           NormKind r, NormKind s, const SmoothBoundOptions& opts = {});

/// max_{k' != k} ||J^T (e_k' - e_k)||_s.
double max_pair_increment(const Mat& jacobian, NormKind s, std::size_t* rival = nullptr,
                          std::size_t* true_class = nullptr);

struct CertifyOptions {
  NormKind r = NormKind::L2;
  NormKind s = NormKind::L2;
  EnumerateOptions enumerate;
  SmoothBoundOptions smooth;
};

struct MaskContribution {
  std::string id;
  Provenance provenance = Provenance::Dataset;
  double op_norm = 0.0;
  /// Best cone value over class pairs; -infinity when no pair is feasible.
  double cone_value = -std::numeric_limits<double>::infinity();
  std::size_t rival = 0;
  std::size_t true_class = 0;
  bool all_descent = false;
};

struct CertificateReport {
  NormKind r = NormKind::L2;
  NormKind s = NormKind::L2;
  ActivationKind activation = ActivationKind::ReLU;
  double L_upper = 0.0;
  double l_lower = -std::numeric_limits<double>::infinity();
  /// -infinity for smooth nets or when no sample has a feasible interior cone.
  double l_N = -std::numeric_limits<double>::infinity();
  bool exhaustive = false;
  /// Smooth-net bounds and non-exhaustive inventories are estimates, not certificates.
  bool estimate = true;
  bool tight = false;
  std::optional<TightnessCheck> tightness;
  std::optional<LowerWitness> witness;
  std::vector<MaskContribution> per_mask;
  std::size_t skipped_degenerate = 0;
};

/// Full certificate: inventory, L, l, l_N and tightness for ReLU nets;
/// smooth_bounds estimates otherwise. Requires s == dual(r).
CertificateReport certify(const Mlp& net, std::span<const LabeledSample> data,
                          const CertifyOptions& opts);

}  // namespace wdro
