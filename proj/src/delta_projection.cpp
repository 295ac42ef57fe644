#include "dcpo/delta_projection.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace dcpo {

namespace {

// Armijo parameters for the dual descent.
constexpr double kInitialStep = 1.0;
constexpr double kShrink = 0.5;
constexpr double kSufficientDecrease = 1e-4;
constexpr double kMinStep = 1e-20;

struct DualEval {
  Matrix log_w;  // normalized log weights
  double log_z = 0.0;
  double objective = 0.0;
};

// exponent(s,a) = log_mu(s,a) + gamma (P V)(s,a) - V(s)
Matrix exponents(const Mdp& mdp, const Matrix& log_mu, const Vector& v) {
  const int n_s = mdp.n_states();
  const int n_a = mdp.n_actions();
  if (log_mu.rows() != n_s || log_mu.cols() != n_a || v.size() != n_s) {
    throw DomainError("dual: dimension mismatch");
  }
  const Vector pv = mdp.transition() * v;
  Matrix e(n_s, n_a);
  for (int s = 0; s < n_s; ++s) {
    for (int a = 0; a < n_a; ++a) {
      e(s, a) = log_mu(s, a) == kNegInf ? kNegInf
                                        : log_mu(s, a) + mdp.discount() * pv(s * n_a + a) - v(s);
    }
  }
  return e;
}

DualEval evaluate(const Mdp& mdp, const Matrix& log_mu, const Vector& v) {
  DualEval out;
  Matrix e = exponents(mdp, log_mu, v);
  out.log_z = log_sum_exp(e.reshaped());
  if (out.log_z == kNegInf) throw InfeasibleError("project_onto_delta: measure has no mass");
  out.log_w = (e.array() - out.log_z).matrix();
  out.objective = out.log_z + (1.0 - mdp.discount()) * mdp.initial_dist().dot(v);
  return out;
}

Vector gradient_from_weights(const Mdp& mdp, const Matrix& log_w) {
  const Matrix w = log_w.array().exp();
  const Eigen::Map<const Eigen::RowVectorXd> flat(w.data(), w.size());
  const Vector inflow = (flat * mdp.transition()).transpose();
  return mdp.discount() * inflow - w.rowwise().sum() + (1.0 - mdp.discount()) * mdp.initial_dist();
}

}  // namespace

double dual_objective(const Mdp& mdp, const Matrix& log_mu, const Vector& v) {
  return evaluate(mdp, log_mu, v).objective;
}

Vector dual_gradient(const Mdp& mdp, const Matrix& log_mu, const Vector& v) {
  return gradient_from_weights(mdp, evaluate(mdp, log_mu, v).log_w);
}

Matrix dual_weights_log(const Mdp& mdp, const Matrix& log_mu, const Vector& v) {
  return evaluate(mdp, log_mu, v).log_w;
}

bool support_is_feasible(const Mdp& mdp, const Matrix& log_mu) {
  const int n_s = mdp.n_states();
  const int n_a = mdp.n_actions();
  if (log_mu.rows() != n_s || log_mu.cols() != n_a) {
    throw DomainError("support_is_feasible: dimension mismatch");
  }
  // Greatest set of states that can be kept forever using supported actions.
  std::vector<bool> alive(static_cast<std::size_t>(n_s), true);
  const bool follows_transitions = mdp.discount() > 0.0;
  for (bool changed = true; changed;) {
    changed = false;
    for (int s = 0; s < n_s; ++s) {
      if (!alive[static_cast<std::size_t>(s)]) continue;
      bool has_action = false;
      for (int a = 0; a < n_a && !has_action; ++a) {
        if (log_mu(s, a) == kNegInf) continue;
        bool closed = true;
        if (follows_transitions) {
          const auto next = mdp.next_state_dist(s, a);
          for (int t = 0; t < n_s && closed; ++t) {
            if (next(t) > 0.0 && !alive[static_cast<std::size_t>(t)]) closed = false;
          }
        }
        has_action = closed;
      }
      if (!has_action) {
        alive[static_cast<std::size_t>(s)] = false;
        changed = true;
      }
    }
  }
  for (int s = 0; s < n_s; ++s) {
    if (mdp.initial_dist()(s) > 0.0 && !alive[static_cast<std::size_t>(s)]) return false;
  }
  return true;
}

namespace {

Matrix hessian_from_weights(const Mdp& mdp, const Matrix& log_w) {
  const int n_s = mdp.n_states();
  const int n_a = mdp.n_actions();
  const double gamma = mdp.discount();
  // Features phi(s,a) = gamma P(.|s,a) - e_s; H = Cov_w(phi).
  Matrix second = Matrix::Zero(n_s, n_s);
  Vector mean = Vector::Zero(n_s);
  Vector phi(n_s);
  for (int s = 0; s < n_s; ++s) {
    for (int a = 0; a < n_a; ++a) {
      if (log_w(s, a) == kNegInf) continue;
      const double w = std::exp(log_w(s, a));
      if (w == 0.0) continue;
      phi = gamma * mdp.next_state_dist(s, a).transpose();
      phi(s) -= 1.0;
      second.noalias() += w * phi * phi.transpose();
      mean += w * phi;
    }
  }
  return second - mean * mean.transpose();
}

struct Step {
  Vector v;
  DualEval eval;
};

// Armijo backtracking along `direction`; nullopt when no step length down to
// kMinStep gives a measurable decrease.
std::optional<Step> backtrack(const Mdp& mdp, const Matrix& log_mu, const Vector& v,
                              const DualEval& current, const Vector& direction, double slope) {
  for (double step = kInitialStep; step >= kMinStep; step *= kShrink) {
    Vector trial = v + step * direction;
    trial.array() -= trial.mean();
    DualEval next = evaluate(mdp, log_mu, trial);
    // Strict: near convergence the right-hand side rounds to the current
    // value and an unchanged objective must not count as progress.
    if (next.objective < current.objective &&
        next.objective <= current.objective + kSufficientDecrease * step * slope) {
      return Step{std::move(trial), std::move(next)};
    }
  }
  return std::nullopt;
}

}  // namespace

Matrix dual_hessian(const Mdp& mdp, const Matrix& log_mu, const Vector& v) {
  return hessian_from_weights(mdp, evaluate(mdp, log_mu, v).log_w);
}

DeltaProjection project_onto_delta(const Mdp& mdp, const Matrix& log_mu,
                                   const ProjectionOptions& options) {
  if (log_mu.array().isNaN().any() || (log_mu.array() == -kNegInf).any()) {
    throw DomainError("project_onto_delta: log_mu must be finite or -inf");
  }
  if (!support_is_feasible(mdp, log_mu)) {
    throw InfeasibleError("project_onto_delta: no occupancy measure fits the support of mu");
  }
  const int n_s = mdp.n_states();
  Vector v = options.warm_start.value_or(Vector::Zero(n_s));
  if (v.size() != n_s) throw DomainError("project_onto_delta: warm start has wrong length");
  v.array() -= v.mean();

  DualEval current = evaluate(mdp, log_mu, v);
  Vector grad = gradient_from_weights(mdp, current.log_w);
  DualState state;
  if (options.record_objective) state.objective_history.push_back(current.objective);
  const Matrix centring = Matrix::Constant(n_s, n_s, 1.0 / n_s);

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm <= options.tol) break;

    Vector direction;
    if (options.method == DualMethod::newton) {
      // Damping shrinks with the gradient so the tail is pure Newton; the
      // centring term fixes the flat direction V + c1.
      Matrix system = hessian_from_weights(mdp, current.log_w) + centring;
      system.diagonal().array() += std::min(grad_norm, 1.0);
      direction = -system.ldlt().solve(grad);
    } else {
      direction = -grad;
    }
    const double slope = grad.dot(direction);
    if (!(slope < 0.0)) break;

    auto step = backtrack(mdp, log_mu, v, current, direction, slope);
    if (!step && options.method == DualMethod::newton) {
      // Objective differences are below double resolution here. A full
      // Newton step is still trusted if it shrinks the gradient.
      Vector trial = v + direction;
      trial.array() -= trial.mean();
      DualEval next = evaluate(mdp, log_mu, trial);
      const Vector next_grad = gradient_from_weights(mdp, next.log_w);
      if (next_grad.lpNorm<Eigen::Infinity>() < grad_norm) step = Step{std::move(trial), std::move(next)};
    }
    if (!step) break;
    v = std::move(step->v);
    current = std::move(step->eval);
    grad = gradient_from_weights(mdp, current.log_w);
    if (options.record_objective) state.objective_history.push_back(current.objective);
  }

  state.v = v;
  state.lambda = current.log_z;
  state.objective = current.objective;
  state.grad_norm = grad.lpNorm<Eigen::Infinity>();
  state.iterations = iter;
  state.converged = state.grad_norm <= options.tol;
  return {OccupancyMeasure::from_log(std::move(current.log_w), true), std::move(state)};
}

}  // namespace dcpo
