#include "dcpo/solver.hpp"

#include <cmath>

namespace dcpo {

Matrix reward_kernel_log(const Mdp& mdp, double epsilon,
                         const std::optional<OccupancyMeasure>& baseline) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("reward kernel: epsilon must be positive");
  }
  Matrix log_xi = mdp.reward() / epsilon;
  if (baseline) {
    if (baseline->n_states() != mdp.n_states() || baseline->n_actions() != mdp.n_actions()) {
      throw DomainError("reward kernel: baseline dimensions do not match the mdp");
    }
    log_xi += baseline->log_mu();
  }
  return log_xi;
}

std::vector<ConstraintSpec> assemble_constraints(const DcpoProblem& problem) {
  std::vector<ConstraintSpec> constraints;
  if (problem.state_constraint) {
    if (problem.state_constraint->axis() != Axis::state) {
      throw DomainError("solve: state_constraint must act on the state axis");
    }
    if (problem.state_constraint->target().size() != problem.mdp.n_states()) {
      throw DomainError("solve: state target length must equal |S|");
    }
    constraints.emplace_back(*problem.state_constraint);
  }
  if (problem.action_constraint) {
    if (problem.action_constraint->axis() != Axis::action) {
      throw DomainError("solve: action_constraint must act on the action axis");
    }
    if (problem.action_constraint->target().size() != problem.mdp.n_actions()) {
      throw DomainError("solve: action target length must equal |A|");
    }
    constraints.emplace_back(*problem.action_constraint);
  }
  constraints.emplace_back(OccupancyConstraint{problem.mdp, problem.projection, true});
  return constraints;
}

SolveReport solve(const DcpoProblem& problem) {
  const Matrix log_xi = reward_kernel_log(problem.mdp, problem.epsilon, problem.baseline);
  const std::vector<ConstraintSpec> constraints = assemble_constraints(problem);

  std::vector<double> state_curve;
  std::vector<double> action_curve;
  std::vector<double> deltas;
  auto observer = [&](const SweepRecord& record, const Matrix& mu) {
    deltas.push_back(record.delta);
    if (problem.state_constraint) {
      state_curve.push_back((Vector(mu.rowwise().sum()) - problem.state_constraint->target()).norm());
    }
    if (problem.action_constraint) {
      action_curve.push_back(
          (Vector(mu.colwise().sum().transpose()) - problem.action_constraint->target()).norm());
    }
  };

  DykstraResult result = dykstra_kl(log_xi, constraints, problem.stop, observer);
  Policy policy = policy_from_occupancy(result.mu);
  const double ret = expected_return(result.mu, problem.mdp);
  return SolveReport{std::move(result.mu),
                     std::move(policy),
                     ret,
                     result.sweeps,
                     result.converged && result.state.dual_stats.unconverged == 0,
                     std::move(state_curve),
                     std::move(action_curve),
                     std::move(deltas),
                     result.state.dual_stats};
}

double regularized_objective(const OccupancyMeasure& mu, const Mdp& mdp, double epsilon) {
  const Matrix log_xi = reward_kernel_log(mdp, epsilon);
  double total = 0.0;
  for (Eigen::Index s = 0; s < mu.mu().rows(); ++s) {
    for (Eigen::Index a = 0; a < mu.mu().cols(); ++a) {
      const double m = mu.mu()(s, a);
      if (m > 0.0) total += m * (log_xi(s, a) - std::log(m));
    }
  }
  return total;
}

std::vector<SolveReport> iterate_outer(const Mdp& mdp, const OuterOptions& options) {
  if (options.epsilon1 < 0.0 || options.epsilon2 < 0.0) {
    throw DomainError("iterate_outer: marginal weights must be nonnegative");
  }
  if (options.k_max < 0) throw DomainError("iterate_outer: k_max must be nonnegative");
  OccupancyMeasure previous = options.initial.value_or(
      occupancy_from_policy(mdp, Policy::uniform(mdp.n_states(), mdp.n_actions())));
  if (previous.mu().rows() != mdp.n_states() || previous.mu().cols() != mdp.n_actions() ||
      std::abs(previous.total_mass() - 1.0) > 1e-8 || flow_residual(previous.mu(), mdp).cwiseAbs().maxCoeff() > 1e-6) {
    throw DomainError("iterate_outer: the initial measure must be a normalized occupancy measure");
  }

  std::vector<SolveReport> trajectory;
  for (int k = 1; k <= options.k_max; ++k) {
    DcpoProblem problem{.mdp = mdp, .epsilon = options.epsilon};
    problem.stop = options.stop;
    problem.projection = options.projection;
    problem.baseline = previous;
    try {
      if (options.epsilon1 > 0.0) {
        problem.state_constraint =
            MarginalPenalty::kl_log(Axis::state, log_row_sums(previous.log_mu()), options.epsilon1);
      }
      if (options.epsilon2 > 0.0) {
        problem.action_constraint =
            MarginalPenalty::kl_log(Axis::action, log_col_sums(previous.log_mu()), options.epsilon2);
      }
      SolveReport report = solve(problem);
      if (!report.converged) {
        throw OuterLoopError("iterate_outer: inner solve " + std::to_string(k) + " did not converge",
                             std::move(trajectory));
      }
      previous = report.mu;
      trajectory.push_back(std::move(report));
    } catch (const OuterLoopError&) {
      throw;
    } catch (const Error& e) {
      throw OuterLoopError("iterate_outer: inner solve " + std::to_string(k) + " failed: " + e.what(),
                           std::move(trajectory));
    }
  }
  return trajectory;
}

}  // namespace dcpo
