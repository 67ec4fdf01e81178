#pragma once
// Seeded model/data generators, the one-atom brute-force DRO oracle, the
// cumulative-l convergence experiment and the end-to-end pipeline.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wdro/attack.hpp"
#include "wdro/certify.hpp"
#include "wdro/network.hpp"

namespace wdro {

struct ModelSpec {
  std::size_t input_dim = 2;
  std::size_t output_dim = 2;
  std::vector<std::size_t> hidden{8};
  ActivationKind activation = ActivationKind::ReLU;
  /// Weights uniform in [-init_range, init_range], biases in half that range.
  double init_range = 1.0;
  /// Weights in [0, init_range] and biases in [0, init_range / 2].
  bool monotone = false;
  double domain_lo = -1.0;
  double domain_hi = 1.0;
};

Mlp gen_model(const ModelSpec& spec, std::uint64_t seed);

/// Monotone hidden layers with a two-logit head [w; -w], w >= 0. Every masked
/// Jacobian is [c; -c] with c >= 0, which makes the tightness condition
/// checkable on the all-active cell. spec.output_dim is ignored.
Mlp gen_mirror_head_model(const ModelSpec& spec, std::uint64_t seed);

struct DataSpec {
  std::size_t samples = 20;
  std::size_t classes = 2;
  /// Standard deviation of each Gaussian cluster.
  double spread = 0.3;
  double domain_lo = -1.0;
  double domain_hi = 1.0;
  std::size_t dim = 2;
};

/// Label i % classes for sample i; cluster means uniform in the middle half of
/// the box; points clipped to the box.
std::vector<LabeledSample> gen_data(const DataSpec& spec, std::uint64_t seed);

/// |x| on [-1, 1], |x|/2 + 1/2 outside: Lipschitz modulus 1, asymptotic slope 1/2.
double remark1_loss(double x);

struct Remark1Result {
  double sup_value = 0.0;
  double best_t = 2.0;
  double best_eta = 0.0;
};

/// Brute-force sup of E[loss] over (1 - eta) delta_2 + eta delta_t with
/// eta |t - 2| <= eps, t on a log-spaced grid over [-1e4, 1e4] and eta on a
/// log-spaced grid over (0, 1] plus the budget boundary min(1, eps/|t - 2|).
Remark1Result remark1_oracle(double epsilon, std::size_t grid = 2000);

struct ConvergenceConfig {
  NormKind r = NormKind::L2;
  EnumerateOptions enumerate{.probes = 200, .exhaustive_cap = 16, .seed = 1};
  LossKind loss = LossKind::CrossEntropy;
  double epsilon = 0.1;
  double pgd_step = 0.025;
  std::size_t pgd_iters = 20;
};

struct ConvergencePoint {
  std::size_t masks = 0;
  Provenance provenance = Provenance::Dataset;
  double cumulative_l = 0.0;
};

struct ConvergenceSeries {
  std::vector<ConvergencePoint> points;
  double L = 0.0;
  double final_l = 0.0;
  double empirical_loss = 0.0;
  double pgd_loss = 0.0;
  /// (E_PGD[loss] - E_PN[loss]) / eps.
  double pgd_gain_per_eps = 0.0;
  bool exhaustive = false;
};

ConvergenceSeries run_convergence(const Mlp& net, std::span<const LabeledSample> data,
                                  const ConvergenceConfig& cfg);
std::string convergence_csv(const ConvergenceSeries& series);

struct ExperimentConfig {
  std::uint64_t seed = 2024;
  ModelSpec model;
  DataSpec data;
  AttackConfig attack{.epsilon = 0.1, .kappa = 2.0, .r = NormKind::L2, .alpha = 0.05};
  CertifyOptions certify;
  ConvergenceConfig convergence;
  LossKind loss = LossKind::CrossEntropy;

  /// Throws InvalidArgument on inconsistent dimensions or when certify.s != dual(certify.r).
  void validate() const;
};

/// Named output documents in emission order.
using PipelineOutputs = std::vector<std::pair<std::string, std::string>>;

/// gen-model, gen-data, certify, attack, evaluate, convergence and the
/// worst-case construction; every document is a pure function of the config.
PipelineOutputs run_pipeline(const ExperimentConfig& cfg);
void write_outputs(const PipelineOutputs& outputs, const std::filesystem::path& dir);

}  // namespace wdro
