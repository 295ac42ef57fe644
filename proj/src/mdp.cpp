#include "dcpo/mdp.hpp"

#include <algorithm>
#include <sstream>

namespace dcpo {

namespace {

constexpr double kProbTol = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool is_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  return (row.array() >= 0.0).all() && std::abs(row.sum() - 1.0) <= kProbTol;
}

}  // namespace

Mdp::Mdp(Matrix transition, Matrix reward, double discount, Vector initial_dist,
         std::vector<std::string> state_labels, std::vector<std::string> action_labels)
    : transition_(std::move(transition)),
      reward_(std::move(reward)),
      discount_(discount),
      initial_dist_(std::move(initial_dist)),
      state_labels_(std::move(state_labels)),
      action_labels_(std::move(action_labels)) {
  const auto n_s = reward_.rows();
  const auto n_a = reward_.cols();
  require(n_s > 0 && n_a > 0, "mdp: need at least one state and one action");
  require(transition_.rows() == n_s * n_a && transition_.cols() == n_s,
          "mdp: transition must be |S||A| x |S|");
  require(initial_dist_.size() == n_s, "mdp: p0 length must equal |S|");
  require(discount_ >= 0.0 && discount_ < 1.0, "mdp: discount must lie in [0, 1)");
  require(transition_.allFinite() && reward_.allFinite() && initial_dist_.allFinite(),
          "mdp: non-finite entries");
  for (Eigen::Index row = 0; row < transition_.rows(); ++row) {
    if (!is_distribution(transition_.row(row))) {
      std::ostringstream msg;
      msg << "mdp: P(.|s=" << row / n_a << ",a=" << row % n_a << ") is not a distribution";
      throw DomainError(msg.str());
    }
  }
  require(is_distribution(initial_dist_.transpose()), "mdp: p0 is not a distribution");
  require(state_labels_.empty() || static_cast<Eigen::Index>(state_labels_.size()) == n_s,
          "mdp: state_labels length mismatch");
  require(action_labels_.empty() || static_cast<Eigen::Index>(action_labels_.size()) == n_a,
          "mdp: action_labels length mismatch");
}

Mdp Mdp::with_reward(Matrix reward) const {
  return Mdp(transition_, std::move(reward), discount_, initial_dist_, state_labels_,
             action_labels_);
}

Policy::Policy(Matrix pi) : pi_(std::move(pi)) {
  require(pi_.rows() > 0 && pi_.cols() > 0, "policy: empty matrix");
  for (Eigen::Index s = 0; s < pi_.rows(); ++s) {
    require(is_distribution(pi_.row(s)), "policy: row " + std::to_string(s) +
                                             " is not a distribution");
  }
}

Policy Policy::uniform(int n_states, int n_actions) {
  return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

Policy Policy::deterministic(const std::vector<int>& actions, int n_actions) {
  Matrix pi = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    require(actions[s] >= 0 && actions[s] < n_actions, "policy: action index out of range");
    pi(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
  }
  return Policy(std::move(pi));
}

std::vector<int> Policy::greedy_actions() const {
  std::vector<int> out(static_cast<std::size_t>(pi_.rows()));
  for (Eigen::Index s = 0; s < pi_.rows(); ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < pi_.cols(); ++a) {
      if (pi_(s, a) > pi_(s, best)) best = a;
    }
    out[static_cast<std::size_t>(s)] = static_cast<int>(best);
  }
  return out;
}

OccupancyMeasure OccupancyMeasure::from_linear(Matrix mu, bool normalized) {
  require(mu.size() > 0, "occupancy: empty matrix");
  require(mu.allFinite() && (mu.array() >= 0.0).all(), "occupancy: entries must be finite and >= 0");
  Matrix log_mu = safe_log(mu);
  return OccupancyMeasure(std::move(mu), std::move(log_mu), normalized);
}

OccupancyMeasure OccupancyMeasure::from_log(Matrix log_mu, bool normalized) {
  require(log_mu.size() > 0, "occupancy: empty matrix");
  require(!log_mu.array().isNaN().any() && !(log_mu.array() == -kNegInf).any(),
          "occupancy: log entries must be finite or -inf");
  Matrix mu = log_mu.array().exp().matrix();
  return OccupancyMeasure(std::move(mu), std::move(log_mu), normalized);
}

Matrix state_transition_under(const Mdp& mdp, const Policy& pi) {
  const int n_s = mdp.n_states();
  const int n_a = mdp.n_actions();
  require(pi.n_states() == n_s && pi.n_actions() == n_a, "policy dimensions do not match mdp");
  Matrix p_pi = Matrix::Zero(n_s, n_s);
  for (int s = 0; s < n_s; ++s) {
    for (int a = 0; a < n_a; ++a) p_pi.row(s) += pi(s, a) * mdp.next_state_dist(s, a);
  }
  return p_pi;
}

Vector state_distribution(const Mdp& mdp, const Policy& pi) {
  const double gamma = mdp.discount();
  const Matrix p_pi = state_transition_under(mdp, pi);
  const Matrix system = Matrix::Identity(mdp.n_states(), mdp.n_states()) - gamma * p_pi.transpose();
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw Error("occupancy_from_policy: singular flow system");
  return lu.solve((1.0 - gamma) * mdp.initial_dist());
}

OccupancyMeasure occupancy_from_policy(const Mdp& mdp, const Policy& pi) {
  const Vector rho = state_distribution(mdp, pi);
  // Round-off can leave -1e-17 on unreachable states.
  Matrix mu = (rho.cwiseMax(0.0).asDiagonal() * pi.matrix());
  return OccupancyMeasure::from_linear(std::move(mu), true);
}

Policy policy_from_occupancy(const Matrix& mu) {
  require((mu.array() >= 0.0).all(), "policy_from_occupancy: negative mass");
  Matrix pi(mu.rows(), mu.cols());
  for (Eigen::Index s = 0; s < mu.rows(); ++s) {
    const double mass = mu.row(s).sum();
    if (mass > 0.0) {
      pi.row(s) = mu.row(s) / mass;
      // Keep the row sum within the validation tolerance.
      pi.row(s) /= pi.row(s).sum();
    } else {
      pi.row(s).setConstant(1.0 / static_cast<double>(mu.cols()));
    }
  }
  return Policy(std::move(pi));
}

Policy policy_from_occupancy(const OccupancyMeasure& mu) { return policy_from_occupancy(mu.mu()); }

double expected_return(const OccupancyMeasure& mu, const Mdp& mdp) {
  require(mu.n_states() == mdp.n_states() && mu.n_actions() == mdp.n_actions(),
          "expected_return: dimension mismatch");
  return mu.mu().cwiseProduct(mdp.reward()).sum();
}

Vector flow_residual(const Matrix& mu, const Mdp& mdp) {
  const int n_s = mdp.n_states();
  const int n_a = mdp.n_actions();
  require(mu.rows() == n_s && mu.cols() == n_a, "flow_residual: dimension mismatch");
  const double gamma = mdp.discount();
  // mu flattened row-major is exactly the row index of the transition matrix.
  const Eigen::Map<const Eigen::RowVectorXd> flat(mu.data(), mu.size());
  const Vector inflow = (flat * mdp.transition()).transpose();
  return mu.rowwise().sum() - (1.0 - gamma) * mdp.initial_dist() - gamma * inflow;
}

KlDecomposition kl_decomposition(const OccupancyMeasure& mu, const OccupancyMeasure& mu_prime) {
  require(mu.n_states() == mu_prime.n_states() && mu.n_actions() == mu_prime.n_actions(),
          "kl_decomposition: dimension mismatch");
  const Vector rho = mu.state_marginal();
  const Vector rho_prime = mu_prime.state_marginal();
  KlDecomposition out;
  out.state_term = kl_divergence(rho, rho_prime);
  for (int s = 0; s < mu.n_states(); ++s) {
    if (rho(s) <= 0.0) continue;
    // rho'(s) > 0 is guaranteed by the state-term support check above.
    const Eigen::RowVectorXd pi = mu.mu().row(s) / rho(s);
    const Eigen::RowVectorXd pi_prime = mu_prime.mu().row(s) / rho_prime(s);
    out.conditional_term += rho(s) * kl_divergence(pi, pi_prime);
  }
  return out;
}

Vector policy_value(const Mdp& mdp, const Policy& pi) {
  const Matrix p_pi = state_transition_under(mdp, pi);
  const Vector r_pi = mdp.reward().cwiseProduct(pi.matrix()).rowwise().sum();
  const Matrix system = Matrix::Identity(mdp.n_states(), mdp.n_states()) - mdp.discount() * p_pi;
  return Eigen::FullPivLU<Matrix>(system).solve(r_pi);
}

Matrix optimal_q_values(const Mdp& mdp, double tol) {
  const int n_s = mdp.n_states();
  const int n_a = mdp.n_actions();
  const Eigen::Map<const Vector> flat_reward(mdp.reward().data(), mdp.reward().size());
  Vector v = Vector::Zero(n_s);
  Vector q(n_s * n_a);
  for (int iter = 0; iter < 1'000'000; ++iter) {
    q = flat_reward + mdp.discount() * (mdp.transition() * v);
    const Vector next = Eigen::Map<const Matrix>(q.data(), n_s, n_a).rowwise().maxCoeff();
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change <= tol) break;
  }
  q = flat_reward + mdp.discount() * (mdp.transition() * v);
  return Eigen::Map<const Matrix>(q.data(), n_s, n_a);
}

Policy soft_value_iteration_oracle(const Mdp& mdp) {
  const Matrix q = optimal_q_values(mdp);
  std::vector<int> actions(static_cast<std::size_t>(mdp.n_states()));
  for (int s = 0; s < mdp.n_states(); ++s) {
    int best = 0;
    for (int a = 1; a < mdp.n_actions(); ++a) {
      // Ties within round-off keep the lower index.
      if (q(s, a) > q(s, best) + 1e-10 * (1.0 + std::abs(q(s, best)))) best = a;
    }
    actions[static_cast<std::size_t>(s)] = best;
  }
  return Policy::deterministic(actions, mdp.n_actions());
}

}  // namespace dcpo
