#pragma once

#include "dcpo/mdp.hpp"

#include <optional>
#include <vector>

namespace dcpo {

/// Dual iterate of the KL projection onto the occupancy polytope.
struct DualState {
  Vector v;                  ///< value function, mean-centred
  double lambda = 0.0;       ///< log normalizer log Z
  double objective = 0.0;
  double grad_norm = 0.0;    ///< sup-norm of the dual gradient
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  ///< filled when requested
};

enum class DualMethod {
  /// Levenberg-damped Newton steps with Armijo backtracking.
  newton,
  /// Steepest descent with Armijo backtracking. Stalls near ||grad|| ~ 1e-8
  /// on badly scaled inputs; kept for cross-checking.
  gradient_descent,
};

struct ProjectionOptions {
  double tol = 1e-9;          ///< stop when ||grad||_inf <= tol
  int max_iterations = 50'000;
  DualMethod method = DualMethod::newton;
  /// Record the dual objective after every accepted step.
  bool record_objective = false;
  /// Starting dual point; zero when absent.
  std::optional<Vector> warm_start;
};

struct DeltaProjection {
  OccupancyMeasure mu;
  DualState dual;
};

/// g(V) = log sum_{s,a} mu(s,a) exp(gamma (P V)(s,a) - V(s)) + (1 - gamma) <p0, V>.
double dual_objective(const Mdp& mdp, const Matrix& log_mu, const Vector& v);

/// Gradient of dual_objective: gamma P^T w - w 1 + (1 - gamma) p0, where w is
/// the normalized reweighting of mu. Equals minus the flow residual of w.
Vector dual_gradient(const Mdp& mdp, const Matrix& log_mu, const Vector& v);

/// Normalized weights w(s,a) = mu(s,a) exp(gamma PV - V)(s,a) / Z in log domain.
Matrix dual_weights_log(const Mdp& mdp, const Matrix& log_mu, const Vector& v);

/// True when some member of the occupancy polytope is supported inside the
/// support of mu (entries with log_mu > -inf).
bool support_is_feasible(const Mdp& mdp, const Matrix& log_mu);

/// Hessian of dual_objective (|S| x |S|, positive semidefinite, null on 1).
Matrix dual_hessian(const Mdp& mdp, const Matrix& log_mu, const Vector& v);

/// argmin_{m in Delta} KL(m | mu). Minimizes the dual from V = 0 (or the warm
/// start), re-centring V every step, and returns the normalized reweighting
/// of mu at the final V.
/// Throws InfeasibleError when no occupancy measure fits the support of mu.
/// Hitting the iteration cap is reported through dual.converged.
DeltaProjection project_onto_delta(const Mdp& mdp, const Matrix& log_mu,
                                   const ProjectionOptions& options = {});

}  // namespace dcpo
