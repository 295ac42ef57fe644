#pragma once

#include "dcpo/gridworld.hpp"
#include "dcpo/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcpo {

enum class ExperimentKind { solve, eta_sweep, rho_sweep, imitate, no_up };

ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

/// Marginal constraint of a plain `solve` experiment.
struct ConstraintConfig {
  Axis axis = Axis::action;
  bool hard = true;
  double epsilon = 1.0;  ///< ignored when hard
  Vector target;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::solve;
  /// Inline MDP; when absent `builtin` names a gridworld variant.
  std::optional<Mdp> mdp;
  std::string builtin = "gridworld";
  double epsilon = 0.01;
  /// Overrides of the per-experiment penalty weights.
  std::optional<double> epsilon1;
  std::optional<double> epsilon2;
  std::vector<ConstraintConfig> constraints;
  /// eta_sweep: alpha values; empty means the default seven.
  std::vector<double> alphas;
  StopRule stop{};
  ProjectionOptions projection{};
  std::string output_dir = ".";
  /// Reserved; every solver is deterministic.
  std::optional<long long> seed;
};

nlohmann::json mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const nlohmann::json& j);

/// Throws DomainError on invalid values.
void validate_config(const ExperimentConfig& config);

/// Throws DomainError on a malformed document.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The builtin gridworld spec the config refers to, if any.
std::optional<GridSpec> config_grid(const ExperimentConfig& config);
Mdp config_mdp(const ExperimentConfig& config);

/// Default eta sweep: alpha in {e^-10, .1, .2, .25, .3, .4, .5 - e^-10}.
std::vector<double> default_alphas();
/// [alpha, .5 - alpha, .5 - alpha, alpha]
Vector eta_target(double alpha);
/// .9 on `cell` and .1 spread uniformly over the remaining states.
Vector concentrated_state_target(const GridSpec& spec, Cell cell);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunRecord {
  std::string name;
  std::filesystem::path directory;  ///< relative to the output root
  SolveReport report;
  std::string render;
  std::optional<double> state_residual;   ///< final ||rho - rho'||_2
  std::optional<double> action_residual;  ///< final ||eta - eta'||_2
};

struct ExperimentOutcome {
  std::vector<RunRecord> runs;
  std::vector<CheckResult> checks;
  bool all_converged() const;
  bool checks_passed() const;
};

/// Runs the experiment and writes artifacts plus manifest.json under `out`.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out);

ExperimentOutcome run_solve(const ExperimentConfig& config, const std::filesystem::path& out);
ExperimentOutcome run_eta_sweep(const ExperimentConfig& config, const std::filesystem::path& out);
ExperimentOutcome run_rho_sweep(const ExperimentConfig& config, const std::filesystem::path& out);
ExperimentOutcome run_imitate(const ExperimentConfig& config, const std::filesystem::path& out);
ExperimentOutcome run_no_up(const ExperimentConfig& config, const std::filesystem::path& out);

/// Matrix as nested JSON arrays with 17 significant digits.
std::string format_matrix_json(const Matrix& m);
/// Text table of greedy actions for an MDP without a grid layout.
std::string render_policy_table(const Policy& policy, const Mdp& mdp);

}  // namespace dcpo
