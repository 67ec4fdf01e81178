#include "wdro/certify.hpp"

#include <algorithm>
#include <cmath>

#include "wdro/error.hpp"
#include "wdro/parallel.hpp"
#include "wdro/random.hpp"

namespace wdro {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Dataset: return "dataset";
    case Provenance::RandomProbe: return "probe";
    case Provenance::Exhaustive: return "exhaustive";
  }
  return "?";
}

bool MaskInventory::add(Mask mask, Provenance provenance) {
  std::string key = mask.key();
  auto it = std::lower_bound(sorted_keys_.begin(), sorted_keys_.end(), key);
  if (it != sorted_keys_.end() && *it == key) return false;
  sorted_keys_.insert(it, std::move(key));
  entries_.push_back({std::move(mask), provenance});
  return true;
}

bool MaskInventory::contains(const Mask& mask) const {
  return std::binary_search(sorted_keys_.begin(), sorted_keys_.end(), mask.key());
}

namespace {

bool halfspaces_feasible(const std::vector<Halfspace>& hs, const Box& box) {
  CellPolyhedron partial;
  partial.halfspaces = hs;
  partial.jacobian = Mat(0, box.dim());
  return cell_feasible(partial, box);
}

struct Enumerator {
  const Mlp& net;
  const Box& box;
  std::vector<Halfspace> hs;
  Mask mask;
  std::vector<Mask> out;

  void layer(std::size_t h, const Mat& a, const Vec& b) {
    if (h == net.hidden_layers()) {
      out.push_back(mask);
      return;
    }
    unit(h, 0, a, b);
  }

  void unit(std::size_t h, std::size_t j, const Mat& a, const Vec& b) {
    if (j == a.rows()) {
      const auto& diag = mask.diags[h];
      const std::vector<double> d(diag.begin(), diag.end());
      Vec masked_b = b;
      for (std::size_t i = 0; i < d.size(); ++i) masked_b[i] *= d[i];
      const Mat& w = net.layers()[h + 1].weight;
      Vec next_b = w * masked_b;
      next_b += net.layers()[h + 1].bias;
      layer(h + 1, w * scale_rows(a, d), next_b);
      return;
    }
    Vec row(std::vector<double>(a.row(j).begin(), a.row(j).end()));
    for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
      hs.push_back({row, b[j], bit ? 1 : -1});
      if (halfspaces_feasible(hs, box)) {
        mask.diags[h][j] = bit;
        unit(h, j + 1, a, b);
      }
      hs.pop_back();
    }
    mask.diags[h][j] = 0;
  }
};

}  // namespace

std::vector<Mask> enumerate_feasible_masks(const Mlp& net, const Box& box) {
  if (net.activation() != ActivationKind::ReLU)
    throw Error(ErrorCode::WrongActivation, "mask enumeration needs a ReLU net");
  if (box.dim() != net.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "box and net input dimensions differ");
  Enumerator e{net, box, {}, Mask::all(net, 0), {}};
  e.layer(0, net.layers().front().weight, net.layers().front().bias);
  return std::move(e.out);
}

MaskInventory enumerate_masks(const Mlp& net, std::span<const LabeledSample> data,
                              const Box& box, const EnumerateOptions& opts) {
  if (net.activation() != ActivationKind::ReLU)
    throw Error(ErrorCode::WrongActivation, "mask enumeration needs a ReLU net");
  MaskInventory inv;
  auto add_point = [&](const Vec& x, Provenance p) {
    const MaskAt m = mask_at(net, x);
    if (m.degenerate || inv.contains(m.mask)) return;
    if (cell_feasible(build_cell(net, m.mask), box)) inv.add(m.mask, p);
  };
  for (const auto& s : data) add_point(s.x, Provenance::Dataset);
  Rng rng(opts.seed);
  for (std::size_t i = 0; i < opts.probes; ++i) {
    Vec x(box.dim());
    for (std::size_t k = 0; k < box.dim(); ++k) x[k] = rng.uniform(box.lo[k], box.hi[k]);
    add_point(x, Provenance::RandomProbe);
  }
  if (net.hidden_units() <= opts.exhaustive_cap) {
    for (auto& m : enumerate_feasible_masks(net, box)) inv.add(std::move(m), Provenance::Exhaustive);
    inv.exhaustive = true;
  }
  return inv;
}

double loss_lipschitz_factor(NormKind s) { return sensitivity_factor(dual(s)); }

UpperBound upper_bound_L(const Mlp& net, const MaskInventory& inv, NormKind r, NormKind s) {
  if (inv.empty()) throw Error(ErrorCode::EmptyInventory, "upper bound over an empty inventory");
  UpperBound out;
  out.op_norms.assign(inv.size(), 0.0);
  parallel_for(inv.size(), [&](std::size_t i) {
    out.op_norms[i] = op_norm(masked_jacobian(net, inv[i].mask), r, s);
  });
  for (std::size_t i = 0; i < inv.size(); ++i)
    if (out.op_norms[i] > out.op_norms[out.argmax]) out.argmax = i;
  out.value = loss_lipschitz_factor(s) * out.op_norms[out.argmax];
  out.certified = inv.exhaustive;
  return out;
}

namespace {

Vec pair_direction(const Mat& jacobian, std::size_t rival, std::size_t true_class) {
  Vec e(jacobian.rows());
  e[rival] = 1.0;
  e[true_class] = -1.0;
  return transpose_times(jacobian, e);
}

// Best (rival, true) pair for one cell; classes restricted to `only_true` when set.
MaskSlope best_pair(const Mlp& net, const Mask& mask, NormKind r, bool interior,
                    std::optional<std::size_t> only_true) {
  const CellPolyhedron cell = build_cell(net, mask);
  const RecessionCone cone = recession_cone(cell);
  const std::size_t classes = net.output_dim();
  MaskSlope best;
  for (std::size_t k = 0; k < classes; ++k) {
    if (only_true && *only_true != k) continue;
    for (std::size_t kp = 0; kp < classes; ++kp) {
      if (kp == k) continue;
      const ConeMaximum m =
          max_linear_over_cone_ball(pair_direction(cell.jacobian, kp, k), cone, r, interior);
      if (m.status != LpStatus::Optimal) continue;
      if (m.value > best.value) {
        best.value = m.value;
        best.rival = kp;
        best.true_class = k;
        best.u = m.u;
        best.all_descent = m.all_descent;
      }
    }
  }
  return best;
}

}  // namespace

LowerBound lower_bound_l(const Mlp& net, const MaskInventory& inv, NormKind r) {
  if (inv.empty()) throw Error(ErrorCode::EmptyInventory, "lower bound over an empty inventory");
  LowerBound out;
  out.per_entry.resize(inv.size());
  parallel_for(inv.size(), [&](std::size_t i) {
    out.per_entry[i] = best_pair(net, inv[i].mask, r, false, std::nullopt);
  });
  for (std::size_t i = 0; i < inv.size(); ++i) {
    const MaskSlope& e = out.per_entry[i];
    if (e.value > out.value) {
      out.value = e.value;
      out.witness = LowerWitness{inv[i].mask, i, e.rival, e.true_class, e.u, e.value, std::nullopt};
    }
  }
  return out;
}

LowerBound practical_lower_bound_lN(const Mlp& net, std::span<const LabeledSample> data,
                                    NormKind r) {
  if (data.empty()) throw Error(ErrorCode::AllDegenerate, "practical lower bound needs samples");
  LowerBound out;
  out.per_entry.resize(data.size());
  std::vector<MaskAt> masks(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) masks[i] = mask_at(net, data[i].x);
  parallel_for(data.size(), [&](std::size_t i) {
    if (masks[i].degenerate) return;
    out.per_entry[i] = best_pair(net, masks[i].mask, r, true, data[i].y);
  });
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (masks[i].degenerate) {
      ++out.skipped_degenerate;
      continue;
    }
    const MaskSlope& e = out.per_entry[i];
    if (e.value > out.value) {
      out.value = e.value;
      out.witness = LowerWitness{masks[i].mask, i, e.rival, e.true_class, e.u, e.value, i};
    }
  }
  if (out.skipped_degenerate == data.size())
    throw Error(ErrorCode::AllDegenerate, "every sample lies on a cell boundary");
  return out;
}

double max_pair_increment(const Mat& jacobian, NormKind s, std::size_t* rival,
                          std::size_t* true_class) {
  double best = kNegInf;
  for (std::size_t k = 0; k < jacobian.rows(); ++k)
    for (std::size_t kp = 0; kp < jacobian.rows(); ++kp) {
      if (kp == k) continue;
      const double v = vec_norm(pair_direction(jacobian, kp, k), s);
      if (v > best) {
        best = v;
        if (rival) *rival = kp;
        if (true_class) *true_class = k;
      }
    }
  return best;
}

TightnessCheck check_tightness(const Mlp& net, const MaskInventory& inv, const UpperBound& upper,
                               const LowerBound& lower, NormKind r, NormKind s) {
  TightnessCheck out;
  out.upper_mask = upper.argmax;
  out.bounds_agree = std::fabs(lower.value - upper.value) <= 1e-6 * std::max(1.0, upper.value);
  if (!lower.witness || inv.empty()) return out;
  out.rival = lower.witness->rival;
  out.true_class = lower.witness->true_class;

  const CellPolyhedron cell = build_cell(net, inv[upper.argmax].mask);
  const Vec g = pair_direction(cell.jacobian, out.rival, out.true_class);
  const Vec xi = dual_norm_maximizer(g, r).h;
  const RecessionCone cone = recession_cone(cell);
  out.cone_membership = std::all_of(cone.rows.begin(), cone.rows.end(), [&](const ConeRow& row) {
    return row.sign * dot(row.a, xi) >= -1e-9;
  });

  const double increment = vec_norm(g, s);
  const double largest = max_pair_increment(cell.jacobian, s);
  const double scaled_norm = loss_lipschitz_factor(s) * upper.op_norms[upper.argmax];
  const double tol = 1e-8 * std::max(1.0, largest);
  out.largest_increment =
      increment >= largest - tol && std::fabs(increment - scaled_norm) <= tol;
  return out;
}

std::vector<WorstCaseDistribution::Atom> WorstCaseDistribution::atoms() const {
  std::vector<Atom> out;
  const double n = static_cast<double>(base.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    out.push_back({base[i].x, base[i].y, (i == root ? 1.0 - eta : 1.0) / n});
  out.push_back({perturbed.x, perturbed.y, eta / n});
  return out;
}

WorstCaseDistribution build_worst_case_distribution(const Mlp& net,
                                                    std::span<const LabeledSample> data,
                                                    LossKind loss_kind, NormKind r,
                                                    double epsilon, const LowerWitness& witness,
                                                    std::span<const double> alpha_schedule) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(witness.value > 0.0) || vec_norm(witness.u, NormKind::LInf) == 0.0)
    throw Error(ErrorCode::NonPositiveSlope,
                "witness slope is not positive; the empirical distribution is the better attack");
  const CellPolyhedron cell = build_cell(net, witness.mask);
  const std::size_t k = witness.true_class;

  // Root: a class-k sample inside the witness cell, else the class-k sample
  // nearest to an interior point of the cell.
  std::optional<std::size_t> root;
  Vec origin;
  for (std::size_t i = 0; i < data.size() && !root; ++i) {
    if (data[i].y != k) continue;
    const MaskAt m = mask_at(net, data[i].x);
    if (!m.degenerate && m.mask == witness.mask) {
      root = i;
      origin = data[i].x;
    }
  }
  if (!root) {
    const auto interior = cell_interior_point(cell, net.domain());
    if (!interior) throw Error(ErrorCode::CellEscape, "witness cell has no interior point in the box");
    origin = *interior;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].y != k) continue;
      const double d = vec_norm(data[i].x - origin, r);
      if (d < nearest) {
        nearest = d;
        root = i;
      }
    }
  }
  if (!root)
    throw Error(ErrorCode::NoRootSample, "no sample carries class " + std::to_string(k));

  const double n = static_cast<double>(data.size());
  std::optional<double> alpha;
  bool any_inside = false;
  Vec x_tilde;
  double distance = 0.0;
  for (double a : alpha_schedule) {
    Vec candidate = origin + a * witness.u;
    const MaskAt m = mask_at(net, candidate);
    if (m.degenerate || m.mask != witness.mask || !cell_contains(cell, candidate)) continue;
    any_inside = true;
    const double d = vec_norm(candidate - data[*root].x, r);
    if (n * epsilon < d && (!alpha || a > *alpha)) {
      alpha = a;
      x_tilde = std::move(candidate);
      distance = d;
    }
  }
  if (!any_inside) throw Error(ErrorCode::CellEscape, "every scheduled ray point left the cell");
  if (!alpha)
    throw Error(ErrorCode::InvalidArgument, "no scheduled alpha moves the root farther than N*eps");

  WorstCaseDistribution out;
  out.base.assign(data.begin(), data.end());
  out.root = *root;
  out.perturbed = {x_tilde, k};
  out.eta = n * epsilon / distance;
  out.epsilon = epsilon;
  out.r = r;
  out.ray_origin = origin;
  out.ray_direction = witness.u;
  out.alpha = *alpha;
  out.distance = distance;
  const double gain = loss(loss_kind, forward(net, x_tilde), k) -
                      loss(loss_kind, forward(net, data[*root].x), k);
  out.slope_shortfall = witness.value - gain / distance;
  return out;
}

double expected_loss(const Mlp& net, const WorstCaseDistribution& dist, LossKind kind) {
  double total = 0.0;
  for (const auto& atom : dist.atoms())
    if (atom.weight != 0.0) total += atom.weight * loss(kind, forward(net, atom.x), atom.y);
  return total;
}

double empirical_loss(const Mlp& net, std::span<const LabeledSample> data, LossKind kind) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : data) total += loss(kind, forward(net, s.x), s.y);
  return total / static_cast<double>(data.size());
}

namespace {

struct SmoothObjectives {
  double op;    // ||J(x)||_{r->s}
  double pair;  // max pair increment
};

SmoothObjectives smooth_objectives(const Mlp& net, const Vec& x, NormKind r, NormKind s) {
  const Mat j = jacobian(net, x);
  return {op_norm(j, r, s), net.output_dim() > 1 ? max_pair_increment(j, s) : 0.0};
}

}  // namespace

SmoothBounds smooth_bounds(const Mlp& net, std::span<const LabeledSample> data, const Box& box,
                           NormKind r, NormKind s, const SmoothBoundOptions& opts) {
  if (net.activation() == ActivationKind::ReLU)
    throw Error(ErrorCode::WrongActivation, "smooth bounds need a smooth activation");
  if (box.dim() != net.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "box and net input dimensions differ");
  const std::size_t n = box.dim();

  std::vector<Vec> starts;
  for (const auto& sample : data) starts.push_back(box.clamp(sample.x));
  Rng rng(opts.seed);
  for (std::size_t i = 0; i < opts.restarts; ++i) {
    Vec x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = rng.uniform(box.lo[k], box.hi[k]);
    starts.push_back(std::move(x));
  }

  SmoothBounds out;
  double best_op = kNegInf, best_pair = kNegInf;
  auto record = [&](const Vec& x, const SmoothObjectives& v) {
    if (v.op > best_op) {
      best_op = v.op;
      out.argmax_L = x;
    }
    if (v.pair > best_pair) {
      best_pair = v.pair;
      out.argmax_l = x;
    }
  };

  const double base_step = 1e-2 * box.width();
  for (const Vec& start : starts) {
    for (bool pair_objective : {false, true}) {
      auto value = [&](const SmoothObjectives& v) { return pair_objective ? v.pair : v.op; };
      Vec x = start;
      SmoothObjectives cur = smooth_objectives(net, x, r, s);
      record(x, cur);
      double step = base_step;
      for (std::size_t t = 0; t < opts.steps && step > 1e-12 * std::max(1.0, box.width()); ++t) {
        Vec grad(n);
        for (std::size_t k = 0; k < n; ++k) {
          Vec up = x, down = x;
          up[k] = std::min(box.hi[k], x[k] + opts.fd_step);
          down[k] = std::max(box.lo[k], x[k] - opts.fd_step);
          const double span = up[k] - down[k];
          if (span <= 0.0) continue;
          grad[k] = (value(smooth_objectives(net, up, r, s)) -
                     value(smooth_objectives(net, down, r, s))) / span;
        }
        const double gnorm = vec_norm(grad, NormKind::L2);
        if (gnorm == 0.0) break;
        Vec next = box.clamp(x + (step / gnorm) * grad);
        const SmoothObjectives v = smooth_objectives(net, next, r, s);
        record(next, v);
        if (value(v) > value(cur)) {
          x = std::move(next);
          cur = v;
        } else {
          step *= 0.5;
        }
      }
    }
  }
  out.L_est = loss_lipschitz_factor(s) * std::max(best_op, 0.0);
  out.l_est = std::max(best_pair, 0.0);
  return out;
}

}  // namespace wdro

namespace wdro {

CertificateReport certify(const Mlp& net, std::span<const LabeledSample> data,
                          const CertifyOptions& opts) {
  if (opts.s != dual(opts.r))
    throw Error(ErrorCode::InvalidArgument, "output norm must be the dual of the cost norm");
  CertificateReport rep;
  rep.r = opts.r;
  rep.s = opts.s;
  rep.activation = net.activation();
  const Box& box = net.domain();

  if (net.activation() != ActivationKind::ReLU) {
    const SmoothBounds sb = smooth_bounds(net, data, box, opts.r, opts.s, opts.smooth);
    rep.L_upper = sb.L_est;
    rep.l_lower = sb.l_est;
    return rep;
  }

  const MaskInventory inv = enumerate_masks(net, data, box, opts.enumerate);
  const UpperBound upper = upper_bound_L(net, inv, opts.r, opts.s);
  const LowerBound lower = lower_bound_l(net, inv, opts.r);
  rep.L_upper = upper.value;
  rep.l_lower = lower.value;
  rep.exhaustive = inv.exhaustive;
  rep.estimate = !inv.exhaustive;
  rep.witness = lower.witness;
  if (!data.empty()) {
    try {
      const LowerBound practical = practical_lower_bound_lN(net, data, opts.r);
      rep.l_N = practical.value;
      rep.skipped_degenerate = practical.skipped_degenerate;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllDegenerate) throw;
      rep.skipped_degenerate = data.size();
    }
  }
  rep.tightness = check_tightness(net, inv, upper, lower, opts.r, opts.s);
  rep.tight = rep.tightness->holds();
  for (std::size_t i = 0; i < inv.size(); ++i) {
    const MaskSlope& m = lower.per_entry[i];
    rep.per_mask.push_back({inv[i].mask.key(), inv[i].provenance, upper.op_norms[i], m.value,
                            m.rival, m.true_class, m.all_descent});
  }
  return rep;
}

}  // namespace wdro
