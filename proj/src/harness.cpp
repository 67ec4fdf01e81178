#include "wdro/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wdro/error.hpp"
#include "wdro/io.hpp"
#include "wdro/random.hpp"
#include "wdro/report.hpp"
#include "wdro/transport.hpp"

namespace wdro {

namespace {

Box make_box(std::size_t n, double lo, double hi) {
  Box box{Vec(n), Vec(n)};
  for (std::size_t i = 0; i < n; ++i) {
    box.lo[i] = lo;
    box.hi[i] = hi;
  }
  return box;
}

Layer random_layer(Rng& rng, std::size_t rows, std::size_t cols, double range, bool monotone) {
  Layer l{Mat(rows, cols), Vec(rows)};
  const double wlo = monotone ? 0.0 : -range;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) l.weight(i, j) = rng.uniform(wlo, range);
  for (std::size_t i = 0; i < rows; ++i) l.bias[i] = rng.uniform(wlo / 2.0, range / 2.0);
  return l;
}

void check_spec(const ModelSpec& spec) {
  if (spec.input_dim == 0 || spec.output_dim == 0)
    throw Error(ErrorCode::InvalidArgument, "model dimensions must be positive");
  if (std::any_of(spec.hidden.begin(), spec.hidden.end(), [](std::size_t w) { return w == 0; }))
    throw Error(ErrorCode::InvalidArgument, "hidden widths must be positive");
  if (!(spec.init_range > 0.0)) throw Error(ErrorCode::InvalidArgument, "init_range must be > 0");
  if (!(spec.domain_lo < spec.domain_hi))
    throw Error(ErrorCode::InvalidArgument, "domain_lo must be below domain_hi");
}

}  // namespace

Mlp gen_model(const ModelSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  Rng rng(seed);
  std::vector<Layer> layers;
  std::size_t cols = spec.input_dim;
  for (std::size_t w : spec.hidden) {
    layers.push_back(random_layer(rng, w, cols, spec.init_range, spec.monotone));
    cols = w;
  }
  layers.push_back(random_layer(rng, spec.output_dim, cols, spec.init_range, spec.monotone));
  return Mlp(std::move(layers), spec.activation,
             make_box(spec.input_dim, spec.domain_lo, spec.domain_hi));
}

Mlp gen_mirror_head_model(const ModelSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  Rng rng(seed);
  std::vector<Layer> layers;
  std::size_t cols = spec.input_dim;
  for (std::size_t w : spec.hidden) {
    layers.push_back(random_layer(rng, w, cols, spec.init_range, true));
    cols = w;
  }
  Layer head{Mat(2, cols), Vec(2)};
  for (std::size_t j = 0; j < cols; ++j) {
    const double w = rng.uniform(0.0, spec.init_range);
    head.weight(0, j) = w;
    head.weight(1, j) = -w;
  }
  layers.push_back(std::move(head));
  return Mlp(std::move(layers), spec.activation,
             make_box(spec.input_dim, spec.domain_lo, spec.domain_hi));
}

std::vector<LabeledSample> gen_data(const DataSpec& spec, std::uint64_t seed) {
  if (spec.samples == 0 || spec.classes == 0 || spec.dim == 0)
    throw Error(ErrorCode::InvalidArgument, "data spec needs samples, classes and dim > 0");
  if (!(spec.domain_lo < spec.domain_hi))
    throw Error(ErrorCode::InvalidArgument, "domain_lo must be below domain_hi");
  Rng rng(seed);
  const double quarter = (spec.domain_hi - spec.domain_lo) / 4.0;
  std::vector<Vec> means;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    Vec m(spec.dim);
    for (auto& v : m) v = rng.uniform(spec.domain_lo + quarter, spec.domain_hi - quarter);
    means.push_back(std::move(m));
  }
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t y = i % spec.classes;
    Vec x(spec.dim);
    for (std::size_t k = 0; k < spec.dim; ++k)
      x[k] = std::clamp(means[y][k] + spec.spread * rng.normal(), spec.domain_lo, spec.domain_hi);
    out.push_back({std::move(x), y});
  }
  return out;
}

double remark1_loss(double x) {
  const double a = std::fabs(x);
  return a <= 1.0 ? a : a / 2.0 + 0.5;
}

Remark1Result remark1_oracle(double epsilon, std::size_t grid) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  grid = std::max<std::size_t>(grid, 2);
  constexpr double anchor = 2.0;
  const double base = remark1_loss(anchor);
  Remark1Result best{base, anchor, 0.0};
  if (epsilon == 0.0) return best;

  std::vector<double> ts;
  for (std::size_t i = 0; i < grid; ++i) {
    const double m = std::pow(10.0, -4.0 + 8.0 * static_cast<double>(i) / static_cast<double>(grid - 1));
    for (double t : {anchor + m, anchor - m, m, -m}) ts.push_back(t);
  }
  const std::size_t eta_grid = 200;
  std::vector<double> etas;
  for (std::size_t i = 0; i < eta_grid; ++i)
    etas.push_back(std::pow(10.0, -8.0 * (1.0 - static_cast<double>(i) / (eta_grid - 1))));

  for (double t : ts) {
    const double dist = std::fabs(t - anchor);
    if (dist == 0.0) continue;
    const double gain = remark1_loss(t) - base;
    auto consider = [&](double eta) {
      const double v = base + eta * gain;
      if (v > best.sup_value) best = {v, t, eta};
    };
    for (double eta : etas)
      if (eta * dist <= epsilon) consider(eta);
    consider(std::min(1.0, epsilon / dist));
  }
  return best;
}

ConvergenceSeries run_convergence(const Mlp& net, std::span<const LabeledSample> data,
                                  const ConvergenceConfig& cfg) {
  const MaskInventory inv = enumerate_masks(net, data, net.domain(), cfg.enumerate);
  const NormKind s = dual(cfg.r);
  const UpperBound upper = upper_bound_L(net, inv, cfg.r, s);
  const LowerBound lower = lower_bound_l(net, inv, cfg.r);
  ConvergenceSeries out;
  out.L = upper.value;
  out.exhaustive = inv.exhaustive;
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inv.size(); ++i) {
    running = std::max(running, lower.per_entry[i].value);
    out.points.push_back({i + 1, inv[i].provenance, running});
  }
  out.final_l = running;
  out.empirical_loss = empirical_loss(net, data, cfg.loss);
  if (cfg.epsilon > 0.0) {
    const AdvDistribution pgd =
        pgd_baseline(net, data, cfg.loss, cfg.epsilon, cfg.r, cfg.pgd_step, cfg.pgd_iters);
    out.pgd_loss = evaluate(net, pgd, cfg.loss).expected_loss;
    out.pgd_gain_per_eps = (out.pgd_loss - out.empirical_loss) / cfg.epsilon;
  } else {
    out.pgd_loss = out.empirical_loss;
  }
  return out;
}

std::string convergence_csv(const ConvergenceSeries& series) {
  std::ostringstream out;
  out << "masks,provenance,cumulative_l,L,pgd_gain_per_eps\n";
  for (const auto& p : series.points)
    out << p.masks << ',' << to_string(p.provenance) << ',' << io::format_real(p.cumulative_l)
        << ',' << io::format_real(series.L) << ',' << io::format_real(series.pgd_gain_per_eps)
        << '\n';
  return out.str();
}

void ExperimentConfig::validate() const {
  if (certify.s != dual(certify.r))
    throw Error(ErrorCode::InvalidArgument, "certificate output norm must be dual to the cost norm");
  if (convergence.r != certify.r || attack.r != certify.r)
    throw Error(ErrorCode::InvalidArgument, "attack, convergence and certificate norms differ");
  if (data.dim != model.input_dim)
    throw Error(ErrorCode::DimensionMismatch, "data dimension differs from the model input");
  if (data.classes != model.output_dim)
    throw Error(ErrorCode::DimensionMismatch, "class count differs from the model output");
  attack.validate();
}

PipelineOutputs run_pipeline(const ExperimentConfig& cfg) {
  cfg.validate();
  const Mlp net = gen_model(cfg.model, cfg.seed);
  DataSpec dspec = cfg.data;
  dspec.domain_lo = cfg.model.domain_lo;
  dspec.domain_hi = cfg.model.domain_hi;
  const auto data = gen_data(dspec, cfg.seed + 1);
  PipelineOutputs out;
  out.emplace_back("model.txt", io::write_model(net));
  out.emplace_back("data.csv", io::write_dataset(data));

  const CertificateReport cert = certify(net, data, cfg.certify);
  out.emplace_back("certificate.json", report::certificate_json(cert));
  if (net.activation() == ActivationKind::ReLU) out.emplace_back("masks.csv", report::masks_csv(cert));

  AttackTrace trace;
  const AdvDistribution adv = wda(net, data, cfg.attack, &trace);
  out.emplace_back("adv.json", report::adv_json(adv));
  out.emplace_back("trace.csv", report::trace_csv(trace));
  out.emplace_back("eval.json", report::evaluation_json(evaluate(net, adv, cfg.loss), cfg.loss));

  if (net.activation() == ActivationKind::ReLU) {
    out.emplace_back("convergence.csv",
                     convergence_csv(run_convergence(net, data, cfg.convergence)));
    if (cert.witness && cert.witness->value > 0.0) {
      const WorstCaseDistribution wc = build_worst_case_distribution(
          net, data, cfg.loss, cfg.certify.r, cfg.attack.epsilon, *cert.witness);
      report::WorstCaseSummary summary{empirical_loss(net, data, cfg.loss),
                                       expected_loss(net, wc, cfg.loss),
                                       canonical_cost(wc, cfg.certify.r)};
      out.emplace_back("worst_case.json", report::worst_case_json(wc, summary));
    }
  }
  return out;
}

void write_outputs(const PipelineOutputs& outputs, const std::filesystem::path& dir) {
  for (const auto& [name, contents] : outputs) io::write_file(dir / name, contents);
}

}  // namespace wdro
