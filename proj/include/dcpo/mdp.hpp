#pragma once

#include "dcpo/core.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dcpo {

/// Finite discounted MDP (S, A, P, r, gamma, p0). Validated on construction
/// and immutable afterwards.
class Mdp {
 public:
  /// `transition` is |S||A| x |S| with row s * |A| + a holding P(.|s,a).
  /// Throws DomainError when any invariant fails (absolute tolerance 1e-12).
  Mdp(Matrix transition, Matrix reward, double discount, Vector initial_dist,
      std::vector<std::string> state_labels = {}, std::vector<std::string> action_labels = {});

  int n_states() const { return static_cast<int>(reward_.rows()); }
  int n_actions() const { return static_cast<int>(reward_.cols()); }
  double discount() const { return discount_; }

  const Matrix& transition() const { return transition_; }
  const Matrix& reward() const { return reward_; }
  const Vector& initial_dist() const { return initial_dist_; }
  const std::vector<std::string>& state_labels() const { return state_labels_; }
  const std::vector<std::string>& action_labels() const { return action_labels_; }

  /// P(.|s,a) as a row view.
  auto next_state_dist(int s, int a) const { return transition_.row(s * n_actions() + a); }

  /// Same dynamics with a different reward matrix.
  Mdp with_reward(Matrix reward) const;

 private:
  Matrix transition_;
  Matrix reward_;
  double discount_;
  Vector initial_dist_;
  std::vector<std::string> state_labels_;
  std::vector<std::string> action_labels_;
};

/// Row-stochastic |S| x |A| matrix pi(a|s).
class Policy {
 public:
  explicit Policy(Matrix pi);

  static Policy uniform(int n_states, int n_actions);
  /// One-hot policy from an action index per state.
  static Policy deterministic(const std::vector<int>& actions, int n_actions);

  const Matrix& matrix() const { return pi_; }
  int n_states() const { return static_cast<int>(pi_.rows()); }
  int n_actions() const { return static_cast<int>(pi_.cols()); }
  double operator()(int s, int a) const { return pi_(s, a); }

  /// Argmax action per state, lowest index on ties.
  std::vector<int> greedy_actions() const;

 private:
  Matrix pi_;
};

/// Nonnegative |S| x |A| measure together with its entrywise log (-inf on
/// exact zeros). `normalized` records whether the total mass is one; Dykstra
/// intermediates carry arbitrary positive mass.
class OccupancyMeasure {
 public:
  static OccupancyMeasure from_linear(Matrix mu, bool normalized);
  static OccupancyMeasure from_log(Matrix log_mu, bool normalized);

  const Matrix& mu() const { return mu_; }
  const Matrix& log_mu() const { return log_mu_; }
  bool normalized() const { return normalized_; }
  int n_states() const { return static_cast<int>(mu_.rows()); }
  int n_actions() const { return static_cast<int>(mu_.cols()); }

  double total_mass() const { return mu_.sum(); }
  /// rho = mu 1
  Vector state_marginal() const { return mu_.rowwise().sum(); }
  /// eta = mu^T 1
  Vector action_marginal() const { return mu_.colwise().sum().transpose(); }

 private:
  OccupancyMeasure(Matrix mu, Matrix log_mu, bool normalized)
      : mu_(std::move(mu)), log_mu_(std::move(log_mu)), normalized_(normalized) {}

  Matrix mu_;
  Matrix log_mu_;
  bool normalized_;
};

/// P_pi[s][s'] = sum_a pi(a|s) P(s'|s,a).
Matrix state_transition_under(const Mdp& mdp, const Policy& pi);

/// Discounted state distribution rho^pi = (1 - gamma) (I - gamma P_pi^T)^{-1} p0.
Vector state_distribution(const Mdp& mdp, const Policy& pi);

/// mu^pi(s,a) = rho^pi(s) pi(a|s), from a dense linear solve.
OccupancyMeasure occupancy_from_policy(const Mdp& mdp, const Policy& pi);

/// pi(a|s) = mu(s,a) / sum_a mu(s,a); zero-mass rows become uniform.
Policy policy_from_occupancy(const OccupancyMeasure& mu);
Policy policy_from_occupancy(const Matrix& mu);

/// E_mu[r] = sum_{s,a} mu(s,a) r(s,a).
double expected_return(const OccupancyMeasure& mu, const Mdp& mdp);

/// R(mu)[s] = sum_a mu(s,a) - (1 - gamma) p0(s) - gamma sum_{s',a'} P(s|s',a') mu(s',a').
/// Zero exactly on the occupancy polytope.
Vector flow_residual(const Matrix& mu, const Mdp& mdp);
inline Vector flow_residual(const OccupancyMeasure& mu, const Mdp& mdp) {
  return flow_residual(mu.mu(), mdp);
}

/// Generalized KL(p|q) = sum p log(p/q) - p + q over matching shapes.
/// Throws DomainError if p > 0 where q == 0.
template <typename P, typename Q>
double kl_divergence(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw DomainError("kl_divergence: shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double pv = p(i, j);
      const double qv = q(i, j);
      if (pv < 0.0 || qv < 0.0) throw DomainError("kl_divergence: negative entry");
      if (pv > 0.0) {
        if (qv <= 0.0) throw DomainError("kl_divergence: support violation (p > 0 where q = 0)");
        total += pv * std::log(pv / qv);
      }
      total += qv - pv;
    }
  }
  return total;
}

struct KlDecomposition {
  double state_term = 0.0;        ///< KL(mu 1 | mu' 1)
  double conditional_term = 0.0;  ///< E_{rho^mu}[KL(pi | pi')]
};

/// Splits KL(mu|mu') into the state-marginal shift and the expected
/// per-state policy shift. The two terms add up to the joint KL.
KlDecomposition kl_decomposition(const OccupancyMeasure& mu, const OccupancyMeasure& mu_prime);

/// Value of a policy: V^pi = (I - gamma P_pi)^{-1} r_pi.
Vector policy_value(const Mdp& mdp, const Policy& pi);

/// Hard-max value iteration to a 1e-12 sup-norm fixed point; returns the
/// greedy deterministic policy (lowest action index on ties).
Policy soft_value_iteration_oracle(const Mdp& mdp);

/// Optimal Q-values from the same value iteration.
Matrix optimal_q_values(const Mdp& mdp, double tol = 1e-12);

}  // namespace dcpo
