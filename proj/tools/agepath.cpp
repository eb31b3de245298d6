// agepath: trace, sweep, benchmark and verify self-paced learning age-paths.
#include "agepath/log.hpp"
#include "agepath/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <vector>

using namespace agepath;

int main(int argc, char** argv) {
  log::init_from_env();
  CLI::App app{"Self-paced learning age-path engine"};
  app.set_config("--config", "", "flat key=value file; flags given on the command line win");

  RunConfig cfg;
  std::string command, model = "lasso", reg = "linear", kernel = "gaussian";
  std::vector<long> synth;
  double gamma = 1.0;
  app.add_option("command", command, "path | acs | bench | verify")
      ->required()
      ->check(CLI::IsMember({"path", "acs", "bench", "verify"}));
  app.add_option("--model", model, "svm | lasso | logistic")->check(CLI::IsMember({"svm", "lasso", "logistic"}));
  app.add_option("--reg", reg, "hard | linear | mixture")->check(CLI::IsMember({"hard", "linear", "mixture"}));
  app.add_option("--gamma", gamma, "mixture regularizer gamma");
  app.add_option("--C", cfg.hyper.C, "loss weight (svm, logistic)");
  app.add_option("--alpha", cfg.hyper.alpha, "L1 strength (lasso)");
  app.add_option("--kernel", kernel, "svm kernel: linear | gaussian")->check(CLI::IsMember({"linear", "gaussian"}));
  app.add_option("--kernel-gamma", cfg.hyper.kernel.gamma, "gaussian kernel width");
  app.add_option("--lmin", cfg.lambda_min, "smallest age");
  app.add_option("--lmax", cfg.lambda_max, "largest age");
  app.add_option("--acs-step", cfg.acs_step, "ACS grid step");
  auto* data = app.add_option("--data", cfg.data, "csv (target in last column) or libsvm file");
  app.add_option("--synth", synth, "synthetic data size n,d")->expected(2)->delimiter(',')->excludes(data);
  app.add_option("--noise", cfg.noise, "fraction of corrupted rows");
  app.add_flag("--standardize", cfg.standardize, "standardize features before fitting");
  app.add_option("--seed", cfg.seed, "seed for every random stream");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--trials", cfg.trials, "bench repetitions");
  app.add_option("--kkt-tol", cfg.trace.kkt_tol, "turning/jump threshold");
  app.add_option("--rtol", cfg.trace.rtol, "integrator relative tolerance");
  app.add_option("--atol", cfg.trace.atol, "integrator absolute tolerance");
  app.add_option("--delta", cfg.trace.delta, "warm-start offset after a jump");
  app.add_option("--acs-tol", cfg.acs.outer_tol, "ACS outer tolerance");
  app.add_option("--verify-step", cfg.verify_step, "dense ACS grid step for verify");
  app.add_option("--rhs-scale", cfg.rhs_scale, "scale the path derivative (fault injection)")->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.command = parse_command(command);
    cfg.model = parse_model(model);
    cfg.reg = reg == "mixture" ? SpRegularizer::mixture(gamma) : SpRegularizer{parse_family(reg), 0.0};
    cfg.hyper.kernel.kind = kernel == "linear" ? KernelKind::linear : KernelKind::gaussian;
    if (!synth.empty()) {
      cfg.synth_n = synth[0];
      cfg.synth_d = synth[1];
    }
    cfg.validate();

    switch (cfg.command) {
      case Command::path:
        std::cout << run_path(cfg).summary_json() << '\n';
        return 0;
      case Command::acs:
        std::cout << run_acs(cfg).summary_json() << '\n';
        return 0;
      case Command::bench:
        std::cout << run_bench(cfg).to_json() << '\n';
        return 0;
      case Command::verify: {
        const VerifyReport rep = run_verify(cfg);
        std::cout << rep.to_json() << '\n';
        return rep.pass() ? 0 : 2;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "agepath " << command << ": " << e.what() << '\n';
    return 1;
  }
  return 1;
}
