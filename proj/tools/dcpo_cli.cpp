// dcpo: run the gridworld experiments and write policies, occupancy
// measures and convergence curves.

#include "dcpo/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<double> epsilon;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<int> max_sweeps;
  std::optional<double> tol;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "experiment JSON")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--epsilon", f.epsilon, "reward temperature");
  sub->add_option("--eps1", f.eps1, "state-marginal KL weight");
  sub->add_option("--eps2", f.eps2, "action-marginal KL weight (hard when unset)");
  sub->add_option("--max-sweeps", f.max_sweeps, "Dykstra sweep cap");
  sub->add_option("--tol", f.tol, "Frobenius stopping tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally constrained policy optimization on finite MDPs"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[] = {"solve", "eta-sweep", "rho-sweep", "imitate", "no-up"};
  for (const char* name : names) add_flags(app.add_subcommand(name), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    dcpo::ExperimentConfig config;
    if (!flags.config.empty()) config = dcpo::load_config(flags.config);
    const auto kind = dcpo::experiment_kind_from_string(name);
    if (!flags.config.empty() && config.experiment != kind) {
      throw dcpo::DomainError("config experiment '" + dcpo::to_string(config.experiment) +
                              "' does not match subcommand '" + name + "'");
    }
    config.experiment = kind;
    if (flags.epsilon) config.epsilon = *flags.epsilon;
    if (flags.eps1) config.epsilon1 = *flags.eps1;
    if (flags.eps2) config.epsilon2 = *flags.eps2;
    if (flags.max_sweeps) config.stop.max_sweeps = *flags.max_sweeps;
    if (flags.tol) config.stop.frobenius_tol = *flags.tol;
    dcpo::validate_config(config);
    const std::string out = flags.out.empty() ? config.output_dir : flags.out;

    const dcpo::ExperimentOutcome outcome = dcpo::run_experiment(config, out);
    for (const auto& run : outcome.runs) {
      std::cout << run.name << ": " << (run.report.converged ? "converged" : "NOT CONVERGED") << " after "
                << run.report.iterations << " sweeps\n"
                << run.render << "\n";
    }
    for (const auto& check : outcome.checks) {
      std::cout << (check.passed ? "ok   " : "FAIL ") << check.name
                << (check.detail.empty() ? "" : "  " + check.detail) << "\n";
    }
    std::cout << "manifest: " << (std::filesystem::path(out) / "manifest.json").string() << "\n";
    return outcome.all_converged() ? 0 : 2;
  } catch (const dcpo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
