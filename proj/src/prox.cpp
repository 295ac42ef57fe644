#include "dcpo/prox.hpp"

#include <string>

namespace dcpo {

namespace {

enum class Rule { kl, hard };

// Rescales each row of log_mu so its log-mass becomes new_log_mass(i).
Matrix rescale_rows(const Matrix& log_mu, const Vector& log_mass, const Vector& new_log_mass) {
  Matrix out = log_mu;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (new_log_mass(i) == kNegInf) {
      out.row(i).setConstant(kNegInf);
    } else {
      out.row(i).array() += new_log_mass(i) - log_mass(i);
    }
  }
  return out;
}

// Shared row prox on a log target; the column variants run it on the transpose.
Matrix row_prox(const Matrix& log_mu, const Vector& log_target, double epsilon, Rule rule,
                const char* name) {
  if (log_target.size() != log_mu.rows()) {
    throw DomainError(std::string(name) + ": target length does not match the marginal");
  }
  const Vector log_mass = log_row_sums(log_mu);
  Vector new_log_mass(log_mass.size());
  for (Eigen::Index i = 0; i < log_mass.size(); ++i) {
    if (log_mass(i) == kNegInf) {
      if (log_target(i) > kNegInf) {
        throw InfeasibleError(std::string(name) + ": marginal entry " + std::to_string(i) +
                              " has zero mass but positive target");
      }
      new_log_mass(i) = kNegInf;
      continue;
    }
    if (rule == Rule::hard) {
      new_log_mass(i) = log_target(i);
    } else {
      if (log_target(i) == kNegInf) {
        throw DomainError(std::string(name) + ": KL target must be strictly positive");
      }
      new_log_mass(i) = (log_mass(i) + epsilon * log_target(i)) / (1.0 + epsilon);
    }
  }
  return rescale_rows(log_mu, log_mass, new_log_mass);
}

Vector checked_log_target(const Vector& target, const char* name) {
  if ((target.array() < 0.0).any() || !target.allFinite()) {
    throw DomainError(std::string(name) + ": target must be finite and nonnegative");
  }
  return safe_log(target);
}

void check_epsilon(double epsilon, const char* name) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError(std::string(name) + ": epsilon must be positive and finite");
  }
}

}  // namespace

Vector log_prox_kl_vector(const Vector& log_m, const Vector& log_target, double epsilon) {
  check_epsilon(epsilon, "log_prox_kl_vector");
  return (log_m + epsilon * log_target) / (1.0 + epsilon);
}

Matrix prox_kl_state(const Matrix& log_mu, const Vector& rho_prime, double epsilon1) {
  check_epsilon(epsilon1, "prox_kl_state");
  return row_prox(log_mu, checked_log_target(rho_prime, "prox_kl_state"), epsilon1, Rule::kl, "prox_kl_state");
}

Matrix prox_kl_action(const Matrix& log_mu, const Vector& eta_prime, double epsilon2) {
  check_epsilon(epsilon2, "prox_kl_action");
  return row_prox(log_mu.transpose(), checked_log_target(eta_prime, "prox_kl_action"), epsilon2, Rule::kl,
                  "prox_kl_action")
      .transpose();
}

Matrix prox_hard_state(const Matrix& log_mu, const Vector& rho_prime) {
  return row_prox(log_mu, checked_log_target(rho_prime, "prox_hard_state"), 0.0, Rule::hard, "prox_hard_state");
}

Matrix prox_hard_action(const Matrix& log_mu, const Vector& eta_prime) {
  return row_prox(log_mu.transpose(), checked_log_target(eta_prime, "prox_hard_action"), 0.0, Rule::hard,
                  "prox_hard_action")
      .transpose();
}

MarginalPenalty::MarginalPenalty(Axis axis, Kind kind, Vector target)
    : axis_(axis), kind_(kind), target_(std::move(target)) {
  if (target_.size() == 0 || !target_.allFinite() || (target_.array() < 0.0).any()) {
    throw DomainError("marginal penalty: target must be a nonempty nonnegative vector");
  }
  if (const auto* kl = std::get_if<KlPenalty>(&kind_)) {
    check_epsilon(kl->epsilon, "marginal penalty");
    if ((target_.array() <= 0.0).any()) {
      throw DomainError("marginal penalty: KL targets must be strictly positive");
    }
  }
  log_target_ = safe_log(target_);
}

double MarginalPenalty::epsilon() const {
  if (const auto* kl = std::get_if<KlPenalty>(&kind_)) return kl->epsilon;
  return std::numeric_limits<double>::infinity();
}

MarginalPenalty MarginalPenalty::kl_log(Axis axis, const Vector& log_target, double epsilon) {
  if (log_target.size() == 0 || log_target.array().isNaN().any() ||
      (log_target.array() == -kNegInf).any()) {
    throw DomainError("marginal penalty: log KL targets must be below +inf");
  }
  check_epsilon(epsilon, "marginal penalty");
  MarginalPenalty out(axis, KlPenalty{epsilon}, Vector::Ones(log_target.size()));
  out.target_ = log_target.array().exp();
  out.log_target_ = log_target;
  return out;
}

Matrix MarginalPenalty::apply(const Matrix& log_mu) const {
  const Rule rule = is_hard() ? Rule::hard : Rule::kl;
  const double eps = is_hard() ? 0.0 : epsilon();
  if (axis_ == Axis::state) return row_prox(log_mu, log_target_, eps, rule, "marginal penalty");
  return row_prox(log_mu.transpose(), log_target_, eps, rule, "marginal penalty").transpose();
}

}  // namespace dcpo
