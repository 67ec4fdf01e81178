#include "wdro/attack.hpp"

#include <cmath>
#include <limits>

#include "wdro/error.hpp"
#include "wdro/parallel.hpp"

namespace wdro {

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::InvalidArgument, "epsilon must be finite and >= 0");
  if (!(kappa >= 1.0) || !std::isfinite(kappa))
    throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (prob == 0 || prob > maxiter)
    throw Error(ErrorCode::InvalidArgument, "need 0 < prob <= maxiter");
}

double AdvDistribution::anchor_weight() const {
  return pairs.empty() ? 0.0 : (1.0 - 1.0 / kappa) / static_cast<double>(pairs.size());
}

double AdvDistribution::adv_weight() const {
  return pairs.empty() ? 0.0 : (1.0 / kappa) / static_cast<double>(pairs.size());
}

double margin(const Vec& logits, std::size_t y) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (j != y) best = std::max(best, logits[j]);
  return best - logits[y];
}

namespace {

void check_inputs(const Mlp& net, std::span<const LabeledSample> data) {
  if (net.output_dim() < 2) throw Error(ErrorCode::InvalidArgument, "attacks need K >= 2");
  for (const auto& s : data) {
    if (s.x.size() != net.input_dim())
      throw Error(ErrorCode::DimensionMismatch, "sample dimension differs from the net input");
    if (s.y >= net.output_dim()) throw Error(ErrorCode::InvalidArgument, "label out of range");
  }
}

void finish_trace(const Mlp& net, const LabeledSample& anchor, const Vec& x, LossKind kind,
                  SampleTrace& t) {
  const Vec z = forward(net, x);
  t.final_loss = loss(kind, z, anchor.y);
  t.final_margin = margin(z, anchor.y);
}

SampleTrace wda_sample(const Mlp& net, const LabeledSample& anchor, const AttackConfig& cfg) {
  const std::size_t classes = net.output_dim();
  const std::size_t k = anchor.y;
  const double radius = cfg.kappa * cfg.epsilon;
  SampleTrace t;
  Vec x = anchor.x;
  t.iterates.push_back(x);
  std::size_t frozen = classes;
  for (std::size_t iter = 0; iter < cfg.maxiter; ++iter) {
    const GeneralJacobian gj = general_jacobian(net, x);
    if (gj.degenerate) ++t.degenerate;
    std::size_t best_j = classes;
    double best_logit = -std::numeric_limits<double>::infinity();
    Vec best_phi;
    bool stalled = false;
    for (std::size_t j = 0; j < classes; ++j) {
      if (j == k || (iter >= cfg.prob && j != frozen)) continue;
      Vec e(classes);
      e[j] = 1.0;
      e[k] = -1.0;
      const DualMaximizer dm = dual_norm_maximizer(transpose_times(gj.jacobian, e), cfg.r);
      Vec phi = dm.stalled ? x : project_ball(x + cfg.alpha * dm.h, anchor.x, radius, cfg.r);
      const double logit = forward(net, phi)[j];
      if (logit > best_logit) {
        best_logit = logit;
        best_j = j;
        best_phi = std::move(phi);
        stalled = dm.stalled;
      }
    }
    if (stalled) ++t.stalls;
    if (iter < cfg.prob) frozen = best_j;
    x = std::move(best_phi);
    t.rivals.push_back(best_j);
    t.iterates.push_back(x);
  }
  finish_trace(net, anchor, x, cfg.loss, t);
  return t;
}

SampleTrace pgd_sample(const Mlp& net, const LabeledSample& anchor, LossKind kind, double epsilon,
                       NormKind r, double step, std::size_t iters) {
  SampleTrace t;
  Vec x = anchor.x;
  t.iterates.push_back(x);
  for (std::size_t it = 0; it < iters; ++it) {
    const GeneralJacobian gj = general_jacobian(net, x);
    if (gj.degenerate) ++t.degenerate;
    const Vec z = forward(net, x);
    const Vec gz = loss_logit_gradient(kind, z, anchor.y);
    const DualMaximizer dm = dual_norm_maximizer(transpose_times(gj.jacobian, gz), r);
    if (dm.stalled) ++t.stalls;
    x = project_ball(x + step * dm.h, anchor.x, epsilon, r);
    t.rivals.push_back(argmax(gz));
    t.iterates.push_back(x);
  }
  finish_trace(net, anchor, x, kind, t);
  return t;
}

AdvDistribution assemble(std::span<const LabeledSample> data, std::vector<SampleTrace>& traces,
                         double kappa, double epsilon, NormKind r, AttackTrace* trace) {
  AdvDistribution out;
  out.kappa = kappa;
  out.epsilon = epsilon;
  out.r = r;
  for (std::size_t i = 0; i < data.size(); ++i)
    out.pairs.push_back({i, data[i], traces[i].iterates.back()});
  if (trace) trace->samples = std::move(traces);
  return out;
}

}  // namespace

AdvDistribution wda(const Mlp& net, std::span<const LabeledSample> data, const AttackConfig& cfg,
                    AttackTrace* trace) {
  cfg.validate();
  check_inputs(net, data);
  std::vector<SampleTrace> traces(data.size());
  parallel_for(data.size(), [&](std::size_t i) { traces[i] = wda_sample(net, data[i], cfg); });
  return assemble(data, traces, cfg.kappa, cfg.epsilon, cfg.r, trace);
}

AdvDistribution pgd_baseline(const Mlp& net, std::span<const LabeledSample> data, LossKind kind,
                             double epsilon, NormKind r, double step, std::size_t iters,
                             AttackTrace* trace) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be > 0");
  check_inputs(net, data);
  std::vector<SampleTrace> traces(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    traces[i] = pgd_sample(net, data[i], kind, epsilon, r, step, iters);
  });
  return assemble(data, traces, 1.0, epsilon, r, trace);
}

Evaluation evaluate(const Mlp& net, const AdvDistribution& dist, LossKind kind) {
  Evaluation ev;
  if (dist.pairs.empty()) return ev;
  const double n = static_cast<double>(dist.pairs.size());
  const double wa = dist.anchor_weight();
  const double wv = dist.adv_weight();
  std::size_t clean = 0, adv = 0;
  for (const auto& p : dist.pairs) {
    const Vec za = forward(net, p.anchor.x);
    const Vec zv = forward(net, p.adv);
    if (wa != 0.0) ev.expected_loss += wa * loss(kind, za, p.anchor.y);
    ev.expected_loss += wv * loss(kind, zv, p.anchor.y);
    clean += argmax(za) == p.anchor.y;
    adv += argmax(zv) == p.anchor.y;
  }
  ev.clean_accuracy = static_cast<double>(clean) / n;
  ev.adv_accuracy = static_cast<double>(adv) / n;
  ev.weighted_accuracy =
      (1.0 - 1.0 / dist.kappa) * ev.clean_accuracy + (1.0 / dist.kappa) * ev.adv_accuracy;
  return ev;
}

}  // namespace wdro
