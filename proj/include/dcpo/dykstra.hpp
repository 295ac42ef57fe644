#pragma once

#include "dcpo/delta_projection.hpp"
#include "dcpo/prox.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace dcpo {

/// Membership in the occupancy polytope of `mdp` (KL projection via the dual).
struct OccupancyConstraint {
  Mdp mdp;
  ProjectionOptions projection{};
  /// Start each projection from the previous dual solution of this set.
  bool warm_start = true;
};

/// One convex set / penalty of the Dykstra splitting.
using ConstraintSpec = std::variant<MarginalPenalty, OccupancyConstraint>;

/// Marginal whose distance to a target is recorded after every sweep.
struct TrackedMarginal {
  Axis axis = Axis::action;
  Vector target;
};

struct StopRule {
  /// Stop once ||mu_sweep - mu_previous_sweep||_F and every single-step
  /// change ||mu^(l) - mu^(l-1)||_F within that sweep fall below this.
  double frobenius_tol = 1e-5;
  int max_sweeps = 5'000;
  std::optional<TrackedMarginal> track_marginal;
};

/// Aggregate statistics of the inner occupancy projections.
struct DualStats {
  long projections = 0;
  long total_iterations = 0;
  int max_iterations = 0;
  double max_final_grad_norm = 0.0;
  long unconverged = 0;
};

struct SweepRecord {
  int sweep = 0;
  double delta = 0.0;  ///< Frobenius change over the sweep (+inf for the first)
  double max_step_delta = 0.0;  ///< largest Frobenius change of a single prox step
  std::optional<double> marginal_residual;  ///< Euclidean, if tracked
};

/// Iterate, correction buffer (one log z per constraint) and diagnostics.
struct DykstraState {
  Matrix log_mu;
  std::vector<Matrix> log_z;
  std::vector<std::optional<Vector>> dual_v;  ///< last dual point per occupancy constraint
  long step = 0;                              ///< l, number of prox steps taken
  std::vector<SweepRecord> history;
  DualStats dual_stats;
};

/// A prox failure tagged with the index of the constraint that raised it.
class ConstraintError : public Error {
 public:
  ConstraintError(std::size_t index, bool infeasible, const std::string& what)
      : Error("constraint " + std::to_string(index) + ": " + what),
        index_(index),
        infeasible_(infeasible) {}
  std::size_t index() const { return index_; }
  bool infeasible() const { return infeasible_; }

 private:
  std::size_t index_;
  bool infeasible_;
};

struct DykstraResult {
  OccupancyMeasure mu;  ///< last sweep iterate (the best available on failure)
  DykstraState state;
  bool converged = false;
  int sweeps = 0;
};

/// mu = xi, every z = 1.
DykstraState dykstra_init(const Matrix& log_xi, std::size_t n_constraints);

/// One step l -> l+1: mu <- Prox_i(mu * z_i), z_i <- z_i * mu_old / mu_new with
/// i = l mod N. Throws ConstraintError if the prox fails.
void dykstra_step(DykstraState& state, const std::vector<ConstraintSpec>& constraints);

/// Called after every full sweep with the sweep-end iterate (linear scale).
using SweepObserver = std::function<void(const SweepRecord&, const Matrix&)>;

/// KL Dykstra over `constraints` applied cyclically in the given order,
/// starting from xi. Stops on the Frobenius rule of StopRule or the sweep cap;
/// the latter returns the last iterate with converged = false.
DykstraResult dykstra_kl(const Matrix& log_xi, const std::vector<ConstraintSpec>& constraints,
                         const StopRule& stop = {}, const SweepObserver& observer = {});

struct SinkhornOptions {
  double tol = 1e-12;  ///< sup-norm residual of both marginals
  int max_iterations = 100'000;
  /// Called with the log plan after every row or column scaling.
  std::function<void(const Matrix&)> on_scaling;
};

struct SinkhornResult {
  Matrix log_plan;
  int iterations = 0;  ///< row+column scaling pairs
  bool converged = false;
};

/// Sinkhorn-Knopp: alternate row and column scalings of xi until both
/// marginals match a and b. Scaling vectors are kept in log domain.
/// Throws DomainError if a and b differ in total mass or are not positive.
SinkhornResult sinkhorn(const Matrix& log_xi, const Vector& a, const Vector& b,
                        const SinkhornOptions& options = {});

}  // namespace dcpo
