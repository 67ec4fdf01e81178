// wdro: command-line front end for the certificate and attack toolkit.
//
// Exit codes: 0 success, 1 usage or input error, 2 numeric or infeasibility error.
// Results go to --out (a file, or "-" for stdout). Without --out a document is
// written to $WDRO_OUT_DIR/<default name> when the variable is set, else to stdout.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "criteria/criteria.hpp"
#include "wdro/attack.hpp"
#include "wdro/certify.hpp"
#include "wdro/error.hpp"
#include "wdro/harness.hpp"
#include "wdro/io.hpp"
#include "wdro/parallel.hpp"
#include "wdro/report.hpp"
#include "wdro/transport.hpp"

namespace {

using namespace wdro;

const std::vector<std::string> kNorms{"1", "2", "inf"};
const std::vector<std::string> kActivations{"relu", "gelu", "silu"};
const std::vector<std::string> kLosses{"ce", "dlr"};

void emit(const std::string& out, const std::string& default_name, const std::string& contents) {
  std::filesystem::path target;
  if (out == "-") {
    std::cout << contents;
    return;
  }
  if (!out.empty()) {
    target = out;
  } else if (const char* dir = std::getenv("WDRO_OUT_DIR"); dir && *dir) {
    target = std::filesystem::path(dir) / default_name;
  } else {
    std::cout << contents;
    return;
  }
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  io::write_file(target, contents);
  std::cerr << "wrote " << target.string() << '\n';
}

Mlp load_net(const std::string& path) { return io::load_model(path); }

std::vector<LabeledSample> load_data(const Mlp& net, const std::string& path) {
  auto data = io::load_dataset(path);
  io::check_dataset(net, data);
  return data;
}

CLI::Option* add_choice(CLI::App* app, const std::string& name, std::string& target,
                        const std::vector<std::string>& allowed, const std::string& desc) {
  return app->add_option(name, target, desc)->check(CLI::IsMember(allowed, CLI::ignore_case));
}

// ---- gen-model -------------------------------------------------------------

struct GenModelArgs {
  ModelSpec spec;
  std::string activation = "relu";
  bool mirror_head = false;
  std::uint64_t seed = 0;
  std::string out;
};

void setup_gen_model(CLI::App& app, GenModelArgs& a) {
  auto* c = app.add_subcommand("gen-model", "Generate a seeded random network");
  c->add_option("--input-dim", a.spec.input_dim, "Input dimension")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--output-dim", a.spec.output_dim, "Number of classes")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  c->add_option("--hidden", a.spec.hidden, "Hidden widths, comma separated")
      ->delimiter(',')->capture_default_str()->check(CLI::PositiveNumber);
  add_choice(c, "--activation", a.activation, kActivations, "Hidden activation")->capture_default_str();
  c->add_option("--init-range", a.spec.init_range, "Weight range")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_flag("--monotone", a.spec.monotone, "Nonnegative weights and biases");
  c->add_flag("--mirror-head", a.mirror_head, "Monotone hidden layers with a [w; -w] head (two classes)");
  c->add_option("--domain-lo", a.spec.domain_lo, "Lower box bound per coordinate")->capture_default_str();
  c->add_option("--domain-hi", a.spec.domain_hi, "Upper box bound per coordinate")->capture_default_str();
  c->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  c->add_option("--out", a.out, "Output file, '-' for stdout");
  c->callback([&a] {
    if (!(a.spec.domain_lo < a.spec.domain_hi))
      throw CLI::ValidationError("--domain-lo", "must be below --domain-hi");
    a.spec.activation = parse_activation(a.activation);
    const Mlp net = a.mirror_head ? gen_mirror_head_model(a.spec, a.seed) : gen_model(a.spec, a.seed);
    emit(a.out, "model.txt", io::write_model(net));
  });
}

// ---- gen-data --------------------------------------------------------------

struct GenDataArgs {
  DataSpec spec;
  std::string model;
  std::uint64_t seed = 0;
  std::string out;
};

void setup_gen_data(CLI::App& app, GenDataArgs& a) {
  auto* c = app.add_subcommand("gen-data", "Generate seeded Gaussian clusters inside the box");
  c->add_option("--samples", a.spec.samples, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--classes", a.spec.classes, "Number of classes")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--dim", a.spec.dim, "Input dimension")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--spread", a.spec.spread, "Cluster standard deviation")->capture_default_str()->check(CLI::NonNegativeNumber);
  c->add_option("--domain-lo", a.spec.domain_lo, "Lower box bound")->capture_default_str();
  c->add_option("--domain-hi", a.spec.domain_hi, "Upper box bound")->capture_default_str();
  c->add_option("--model", a.model, "Take dim, classes and box from this model")->check(CLI::ExistingFile);
  c->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  c->add_option("--out", a.out, "Output file, '-' for stdout");
  c->callback([&a] {
    if (!a.model.empty()) {
      const Mlp net = load_net(a.model);
      a.spec.dim = net.input_dim();
      a.spec.classes = net.output_dim();
      a.spec.domain_lo = net.domain().lo[0];
      a.spec.domain_hi = net.domain().hi[0];
    }
    if (!(a.spec.domain_lo < a.spec.domain_hi))
      throw CLI::ValidationError("--domain-lo", "must be below --domain-hi");
    emit(a.out, "data.csv", io::write_dataset(gen_data(a.spec, a.seed)));
  });
}

// ---- certify ---------------------------------------------------------------

struct CertifyArgs {
  std::string model, data;
  std::string r, s, loss = "ce";
  CertifyOptions opts;
  std::string masks_csv;
  std::optional<double> eps;
  std::string worst_case;
  std::string out;
};

void setup_certify(CLI::App& app, CertifyArgs& a) {
  auto* c = app.add_subcommand("certify", "Compute L, l, l_N and the tightness check");
  c->add_option("--model", a.model, "Model file")->required()->check(CLI::ExistingFile);
  c->add_option("--data", a.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  add_choice(c, "--r", a.r, kNorms, "Transport norm r (1, 2, inf)")->required();
  add_choice(c, "--s", a.s, kNorms, "Gradient norm s; must be the dual of r (default)");
  c->add_option("--probes", a.opts.enumerate.probes, "Random probe points for the mask inventory")->capture_default_str();
  c->add_option("--exhaustive-cap", a.opts.enumerate.exhaustive_cap,
                "Enumerate all feasible masks when hidden units are at most this")->capture_default_str();
  c->add_option("--seed", a.opts.enumerate.seed, "Probe seed")->capture_default_str();
  c->add_option("--restarts", a.opts.smooth.restarts, "Random restarts for smooth nets")->capture_default_str();
  c->add_option("--steps", a.opts.smooth.steps, "Ascent steps for smooth nets")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--masks-csv", a.masks_csv, "Also write the per-mask table to this file");
  c->add_option("--eps", a.eps, "Budget for the worst-case distribution built from the l witness")
      ->check(CLI::NonNegativeNumber);
  add_choice(c, "--loss", a.loss, kLosses, "Loss for the worst-case summary (ce, dlr)")->capture_default_str();
  c->add_option("--worst-case", a.worst_case, "Worst-case output file (with --eps)");
  c->add_option("--out", a.out, "Output file, '-' for stdout");
  c->callback([&a] {
    const Mlp net = load_net(a.model);
    const auto data = load_data(net, a.data);
    a.opts.r = parse_norm(a.r);
    a.opts.s = a.s.empty() ? dual(a.opts.r) : parse_norm(a.s);
    if (a.opts.s != dual(a.opts.r)) throw CLI::ValidationError("--s", "must be the dual norm of --r");
    const CertificateReport rep = certify(net, data, a.opts);
    if (rep.estimate)
      std::cerr << "warning: the mask inventory is not exhaustive; L is an estimate, not a certificate\n";
    emit(a.out, "certificate.json", report::certificate_json(rep));
    if (!a.masks_csv.empty()) emit(a.masks_csv, "masks.csv", report::masks_csv(rep));
    if (a.eps) {
      if (!rep.witness) throw Error(ErrorCode::EmptyInventory, "no lower-bound witness for the worst case");
      const LossKind loss = parse_loss(a.loss);
      const auto wc = build_worst_case_distribution(net, data, loss, a.opts.r, *a.eps, *rep.witness);
      const report::WorstCaseSummary summary{empirical_loss(net, data, loss),
                                             expected_loss(net, wc, loss), canonical_cost(wc, a.opts.r)};
      emit(a.worst_case, "worst_case.json", report::worst_case_json(wc, summary));
    }
  });
}

// ---- attack ----------------------------------------------------------------

struct AttackArgs {
  std::string model, data;
  AttackConfig cfg;
  std::string r = "inf", loss = "ce";
  std::string method = "wda";
  std::string trace;
  std::string out;
};

void setup_attack(CLI::App& app, AttackArgs& a) {
  auto* c = app.add_subcommand("attack", "Run the distributional attack or the PGD baseline");
  c->add_option("--model", a.model, "Model file")->required()->check(CLI::ExistingFile);
  c->add_option("--data", a.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--eps", a.cfg.epsilon, "Budget epsilon")->required()->check(CLI::NonNegativeNumber);
  c->add_option("--alpha", a.cfg.alpha, "Step length")->required()->check(CLI::PositiveNumber);
  add_choice(c, "--r", a.r, kNorms, "Ball norm (1, 2, inf)")->capture_default_str();
  c->add_option("--kappa", a.cfg.kappa, "Mixture parameter, >= 1")->capture_default_str()->check(CLI::Range(1.0, 1e300));
  c->add_option("--prob", a.cfg.prob, "Iterations probing every rival")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--maxiter", a.cfg.maxiter, "Attack iterations")->capture_default_str()->check(CLI::PositiveNumber);
  add_choice(c, "--loss", a.loss, kLosses, "Loss (ce, dlr)")->capture_default_str();
  c->add_option("--method", a.method, "wda or pgd")->capture_default_str()->check(CLI::IsMember({"wda", "pgd"}));
  c->add_option("--seed", a.cfg.seed, "RNG seed")->capture_default_str();
  c->add_option("--trace", a.trace, "Write the per-iteration trace CSV here");
  c->add_option("--out", a.out, "Output file, '-' for stdout");
  c->callback([&a] {
    const Mlp net = load_net(a.model);
    const auto data = load_data(net, a.data);
    a.cfg.r = parse_norm(a.r);
    a.cfg.loss = parse_loss(a.loss);
    AttackTrace trace;
    AttackTrace* tp = a.trace.empty() ? nullptr : &trace;
    AdvDistribution dist;
    if (a.cfg.prob > a.cfg.maxiter) throw CLI::ValidationError("--prob", "must not exceed --maxiter");
    if (a.method == "wda") {
      a.cfg.validate();
      dist = wda(net, data, a.cfg, tp);
    } else {
      dist = pgd_baseline(net, data, a.cfg.loss, a.cfg.epsilon, a.cfg.r, a.cfg.alpha, a.cfg.maxiter, tp);
    }
    emit(a.out, "adv.json", report::adv_json(dist));
    if (tp) emit(a.trace, "trace.csv", report::trace_csv(trace));
  });
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string model, data, adv, loss = "ce";
  std::string out;
};

void setup_eval(CLI::App& app, EvalArgs& a) {
  auto* c = app.add_subcommand("eval", "Evaluate a model on an adversarial distribution");
  c->add_option("--model", a.model, "Model file")->required()->check(CLI::ExistingFile);
  c->add_option("--data", a.data, "Dataset CSV the distribution was built from")->required()->check(CLI::ExistingFile);
  c->add_option("--adv", a.adv, "Adversarial distribution JSON")->required()->check(CLI::ExistingFile);
  add_choice(c, "--loss", a.loss, kLosses, "Loss (ce, dlr)")->capture_default_str();
  c->add_option("--out", a.out, "Output file, '-' for stdout");
  c->callback([&a] {
    const Mlp net = load_net(a.model);
    const auto data = load_data(net, a.data);
    const auto dist = report::adv_from_json(io::read_file(a.adv), data);
    const LossKind loss = parse_loss(a.loss);
    emit(a.out, "eval.json", report::evaluation_json(evaluate(net, dist, loss), loss));
  });
}

// ---- convergence -----------------------------------------------------------

struct ConvergenceArgs {
  std::string model, data;
  ConvergenceConfig cfg;
  std::string r = "2", loss = "ce";
  std::optional<double> pgd_step;
  std::string out;
};

void setup_convergence(CLI::App& app, ConvergenceArgs& a) {
  auto* c = app.add_subcommand("convergence", "Cumulative l as the mask inventory grows, with a PGD reference");
  c->add_option("--model", a.model, "Model file")->required()->check(CLI::ExistingFile);
  c->add_option("--data", a.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  add_choice(c, "--r", a.r, kNorms, "Transport norm (1, 2, inf)")->capture_default_str();
  c->add_option("--eps", a.cfg.epsilon, "PGD budget")->required()->check(CLI::PositiveNumber);
  c->add_option("--probes", a.cfg.enumerate.probes, "Random probe points")->capture_default_str();
  c->add_option("--exhaustive-cap", a.cfg.enumerate.exhaustive_cap, "Exhaustive enumeration cap")->capture_default_str();
  c->add_option("--seed", a.cfg.enumerate.seed, "Probe seed")->capture_default_str();
  c->add_option("--pgd-step", a.pgd_step, "PGD step (default eps/4)")->check(CLI::PositiveNumber);
  c->add_option("--pgd-iters", a.cfg.pgd_iters, "PGD iterations")->capture_default_str()->check(CLI::PositiveNumber);
  add_choice(c, "--loss", a.loss, kLosses, "Loss (ce, dlr)")->capture_default_str();
  c->add_option("--out", a.out, "Output file, '-' for stdout");
  c->callback([&a] {
    const Mlp net = load_net(a.model);
    const auto data = load_data(net, a.data);
    a.cfg.r = parse_norm(a.r);
    a.cfg.loss = parse_loss(a.loss);
    a.cfg.pgd_step = a.pgd_step.value_or(a.cfg.epsilon / 4.0);
    const auto series = run_convergence(net, data, a.cfg);
    if (!series.exhaustive)
      std::cerr << "warning: the mask inventory is not exhaustive; L is an estimate\n";
    emit(a.out, "convergence.csv", convergence_csv(series));
  });
}

// ---- remark1 ---------------------------------------------------------------

struct Remark1Args {
  std::vector<double> eps{0.1, 1.0, 10.0};
  std::size_t grid = 2000;
  std::string out;
};

void setup_remark1(CLI::App& app, Remark1Args& a) {
  auto* c = app.add_subcommand("remark1", "Brute-force one-atom DRO value for the piecewise-linear example");
  c->add_option("--eps", a.eps, "Budgets, comma separated")->delimiter(',')->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--grid", a.grid, "Grid points per axis")->capture_default_str()->check(CLI::Range(10, 1000000));
  c->add_option("--out", a.out, "Output file, '-' for stdout");
  c->callback([&a] {
    std::vector<report::Remark1Row> rows;
    for (double e : a.eps) {
      const auto res = remark1_oracle(e, a.grid);
      rows.push_back({e, res.sup_value, res.best_t, res.best_eta});
    }
    emit(a.out, "remark1.json", report::remark1_json(rows, remark1_loss(2.0)));
  });
}

// ---- selftest --------------------------------------------------------------

struct SelftestArgs {
  std::vector<int> only;
};

int selftest_status = 0;

void setup_selftest(CLI::App& app, SelftestArgs& a) {
  auto* c = app.add_subcommand("selftest", "Run the acceptance criteria");
  c->add_option("--only", a.only, "Criterion ids to run, comma separated")->delimiter(',')->check(CLI::Range(1, 10));
  c->callback([&a] {
    std::vector<criteria::Result> results;
    if (a.only.empty()) {
      results = criteria::run_all();
    } else {
      for (int id : a.only) results.push_back(criteria::run(id));
    }
    for (const auto& r : results) {
      std::cout << criteria::format(r) << '\n';
      if (!r.passed && !criteria::known_failure(r.id)) selftest_status = 2;
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein DRO certificates and attacks for small classifiers", "wdro"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  app.parse_complete_callback([&threads] { set_worker_count(threads); });

  GenModelArgs gm;
  GenDataArgs gd;
  CertifyArgs ct;
  AttackArgs at;
  EvalArgs ev;
  ConvergenceArgs cv;
  Remark1Args r1;
  SelftestArgs st;
  setup_gen_model(app, gm);
  setup_gen_data(app, gd);
  setup_certify(app, ct);
  setup_attack(app, at);
  setup_eval(app, ev);
  setup_convergence(app, cv);
  setup_remark1(app, r1);
  setup_selftest(app, st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Parse || e.code() == ErrorCode::Io ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return selftest_status;
}
