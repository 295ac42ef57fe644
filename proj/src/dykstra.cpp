#include "dcpo/dykstra.hpp"

#include <algorithm>
#include <cmath>

namespace dcpo {

namespace {

Matrix apply_constraint(const ConstraintSpec& constraint, const Matrix& log_input,
                        std::optional<Vector>& dual_v, DualStats& stats) {
  if (const auto* penalty = std::get_if<MarginalPenalty>(&constraint)) {
    return penalty->apply(log_input);
  }
  const auto& occupancy = std::get<OccupancyConstraint>(constraint);
  ProjectionOptions options = occupancy.projection;
  if (occupancy.warm_start && dual_v) options.warm_start = dual_v;
  DeltaProjection result = project_onto_delta(occupancy.mdp, log_input, options);
  dual_v = result.dual.v;
  ++stats.projections;
  stats.total_iterations += result.dual.iterations;
  stats.max_iterations = std::max(stats.max_iterations, result.dual.iterations);
  stats.max_final_grad_norm = std::max(stats.max_final_grad_norm, result.dual.grad_norm);
  if (!result.dual.converged) ++stats.unconverged;
  return result.mu.log_mu();
}

// log z update, with zeros that stay zero carrying a neutral correction.
void update_correction(Matrix& log_z, const Matrix& log_prev, const Matrix& log_next) {
  for (Eigen::Index i = 0; i < log_z.rows(); ++i) {
    for (Eigen::Index j = 0; j < log_z.cols(); ++j) {
      if (log_prev(i, j) == kNegInf || log_next(i, j) == kNegInf) {
        log_z(i, j) = 0.0;
      } else {
        log_z(i, j) += log_prev(i, j) - log_next(i, j);
      }
    }
  }
}

double marginal_residual(const Matrix& mu, const TrackedMarginal& tracked) {
  const Vector marginal =
      tracked.axis == Axis::state ? Vector(mu.rowwise().sum()) : Vector(mu.colwise().sum().transpose());
  if (marginal.size() != tracked.target.size()) {
    throw DomainError("dykstra: tracked target length does not match the marginal");
  }
  return (marginal - tracked.target).norm();
}

}  // namespace

DykstraState dykstra_init(const Matrix& log_xi, std::size_t n_constraints) {
  if (n_constraints == 0) throw DomainError("dykstra: need at least one constraint");
  if (log_xi.size() == 0 || log_xi.array().isNaN().any() || (log_xi.array() == -kNegInf).any()) {
    throw DomainError("dykstra: log xi must be finite or -inf");
  }
  DykstraState state;
  state.log_mu = log_xi;
  state.log_z.assign(n_constraints, Matrix::Zero(log_xi.rows(), log_xi.cols()));
  state.dual_v.assign(n_constraints, std::nullopt);
  return state;
}

void dykstra_step(DykstraState& state, const std::vector<ConstraintSpec>& constraints) {
  if (constraints.size() != state.log_z.size()) {
    throw DomainError("dykstra: constraint count does not match the correction buffer");
  }
  const auto index = static_cast<std::size_t>(state.step % static_cast<long>(constraints.size()));
  Matrix& log_z = state.log_z[index];
  const Matrix log_input = state.log_mu + log_z;
  Matrix log_next;
  try {
    log_next = apply_constraint(constraints[index], log_input, state.dual_v[index], state.dual_stats);
  } catch (const InfeasibleError& e) {
    throw ConstraintError(index, true, e.what());
  } catch (const Error& e) {
    throw ConstraintError(index, false, e.what());
  }
  if (log_next.array().isNaN().any()) {
    throw ConstraintError(index, false, "prox produced NaN");
  }
  update_correction(log_z, state.log_mu, log_next);
  state.log_mu = std::move(log_next);
  ++state.step;
}

DykstraResult dykstra_kl(const Matrix& log_xi, const std::vector<ConstraintSpec>& constraints,
                         const StopRule& stop, const SweepObserver& observer) {
  if (!(stop.frobenius_tol > 0.0) || stop.max_sweeps < 1) {
    throw DomainError("dykstra: stop rule needs a positive tolerance and sweep cap");
  }
  DykstraState state = dykstra_init(log_xi, constraints.size());
  Matrix previous = state.log_mu.array().exp();
  bool converged = false;
  int sweep = 0;
  while (sweep < stop.max_sweeps) {
    SweepRecord record;
    Matrix before_step = previous;
    for (std::size_t k = 0; k < constraints.size(); ++k) {
      dykstra_step(state, constraints);
      Matrix after_step = state.log_mu.array().exp();
      if (sweep > 0) {
        record.max_step_delta = std::max(record.max_step_delta, (after_step - before_step).norm());
      }
      before_step = std::move(after_step);
    }
    ++sweep;
    Matrix current = std::move(before_step);
    record.sweep = sweep;
    if (sweep == 1) {
      record.delta = std::numeric_limits<double>::infinity();
      record.max_step_delta = std::numeric_limits<double>::infinity();
    } else {
      record.delta = (current - previous).norm();
    }
    if (stop.track_marginal) record.marginal_residual = marginal_residual(current, *stop.track_marginal);
    state.history.push_back(record);
    if (observer) observer(record, current);
    previous = std::move(current);
    if (record.delta < stop.frobenius_tol && record.max_step_delta < stop.frobenius_tol) {
      converged = true;
      break;
    }
  }
  const bool has_occupancy = std::any_of(constraints.begin(), constraints.end(), [](const auto& c) {
    return std::holds_alternative<OccupancyConstraint>(c);
  });
  OccupancyMeasure mu = OccupancyMeasure::from_log(state.log_mu, has_occupancy);
  return {std::move(mu), std::move(state), converged, sweep};
}

SinkhornResult sinkhorn(const Matrix& log_xi, const Vector& a, const Vector& b,
                        const SinkhornOptions& options) {
  if (a.size() != log_xi.rows() || b.size() != log_xi.cols()) {
    throw DomainError("sinkhorn: marginal lengths do not match the kernel");
  }
  if ((a.array() <= 0.0).any() || (b.array() <= 0.0).any()) {
    throw DomainError("sinkhorn: marginals must be strictly positive");
  }
  const double mass_a = a.sum();
  const double mass_b = b.sum();
  if (std::abs(mass_a - mass_b) > 1e-12 * std::max(mass_a, mass_b)) {
    throw DomainError("sinkhorn: marginals carry different total mass");
  }
  const Vector log_a = a.array().log();
  const Vector log_b = b.array().log();
  Vector log_u = Vector::Zero(a.size());
  Vector log_v = Vector::Zero(b.size());

  auto plan = [&] {
    Matrix out = log_xi;
    out.colwise() += log_u;
    out.rowwise() += log_v.transpose();
    return out;
  };

  SinkhornResult result;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Matrix kv = log_xi;
    kv.rowwise() += log_v.transpose();
    log_u = log_a - log_row_sums(kv);
    if (options.on_scaling) options.on_scaling(plan());

    Matrix ku = log_xi;
    ku.colwise() += log_u;
    log_v = log_b - log_col_sums(ku);
    const Matrix log_plan = plan();
    if (options.on_scaling) options.on_scaling(log_plan);
    result.iterations = iter + 1;

    const Matrix p = log_plan.array().exp();
    const double row_err = (p.rowwise().sum() - a).lpNorm<Eigen::Infinity>();
    const double col_err = (p.colwise().sum().transpose() - b).lpNorm<Eigen::Infinity>();
    if (row_err <= options.tol && col_err <= options.tol) {
      result.converged = true;
      break;
    }
  }
  result.log_plan = plan();
  return result;
}

}  // namespace dcpo
