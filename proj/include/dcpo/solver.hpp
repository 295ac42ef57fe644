#pragma once

#include "dcpo/dykstra.hpp"

#include <optional>
#include <vector>

namespace dcpo {

/// max_{mu in Delta} -KL(mu | xi) - eps1 D(mu 1 | rho') - eps2 D(mu^T 1 | eta')
/// with xi = baseline * exp(r / epsilon).
struct DcpoProblem {
  Mdp mdp;
  double epsilon = 0.01;  ///< reward temperature
  std::optional<MarginalPenalty> state_constraint{};
  std::optional<MarginalPenalty> action_constraint{};
  /// Reference measure mu' multiplying the reward kernel.
  std::optional<OccupancyMeasure> baseline{};
  StopRule stop{};
  ProjectionOptions projection{};
};

struct SolveReport {
  OccupancyMeasure mu;
  Policy policy;  ///< policy_from_occupancy(mu)
  double expected_return = 0.0;
  int iterations = 0;  ///< Dykstra sweeps
  bool converged = false;
  /// ||sum_a mu_t - rho'||_2 per sweep, when a state constraint is present.
  std::vector<double> state_residual_curve;
  /// ||sum_s mu_t - eta'||_2 per sweep, when an action constraint is present.
  std::vector<double> action_residual_curve;
  std::vector<double> sweep_deltas;
  DualStats dual_stats;
};

/// log xi = r / epsilon (+ log baseline).
Matrix reward_kernel_log(const Mdp& mdp, double epsilon,
                         const std::optional<OccupancyMeasure>& baseline = std::nullopt);

/// Constraint list in application order: state marginal, action marginal,
/// occupancy polytope.
std::vector<ConstraintSpec> assemble_constraints(const DcpoProblem& problem);

/// Runs Dykstra on the assembled problem. Non-convergence is reported through
/// `converged`; prox failures propagate as ConstraintError.
SolveReport solve(const DcpoProblem& problem);

/// sum mu (r / epsilon - log mu), the entropy-regularized objective whose
/// maximizer over Delta is the unconstrained solve. Equals -KL(mu | exp(r / epsilon))
/// up to the constant sum exp(r / epsilon) - 1 on normalized mu.
double regularized_objective(const OccupancyMeasure& mu, const Mdp& mdp, double epsilon);

struct OuterOptions {
  double epsilon = 0.01;   ///< reward temperature of every inner problem
  double epsilon1 = 1.0;   ///< KL weight on the previous state marginal (0 disables)
  double epsilon2 = 1.0;   ///< KL weight on the previous action marginal (0 disables)
  int k_max = 20;
  StopRule stop{};
  ProjectionOptions projection{};
  /// mu_0; the uniform-policy occupancy when absent. Must be a normalized
  /// occupancy measure; zero entries stay zero along the trajectory.
  std::optional<OccupancyMeasure> initial;
};

/// Inner solve failure inside iterate_outer; keeps the completed prefix.
class OuterLoopError : public Error {
 public:
  OuterLoopError(const std::string& what, std::vector<SolveReport> partial)
      : Error(what), partial_(std::move(partial)) {}
  const std::vector<SolveReport>& partial() const { return partial_; }

 private:
  std::vector<SolveReport> partial_;
};

/// mu_k = solve with baseline mu_{k-1}, rho' = mu_{k-1} 1 and eta' = mu_{k-1}^T 1
/// for k = 1..k_max. The expected return never decreases along the trajectory.
/// Returns the reports of mu_1..mu_k_max.
std::vector<SolveReport> iterate_outer(const Mdp& mdp, const OuterOptions& options);

}  // namespace dcpo
