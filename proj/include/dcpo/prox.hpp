#pragma once

#include "dcpo/core.hpp"

#include <variant>

namespace dcpo {

enum class Axis { state, action };

/// epsilon * KL(marginal | target) penalty.
struct KlPenalty {
  double epsilon = 1.0;
};

/// Indicator of marginal == target.
struct HardConstraint {};

/// A penalty or hard constraint on one marginal of the occupancy measure.
/// The target is kept in both linear and log form (log 0 = -inf).
class MarginalPenalty {
 public:
  using Kind = std::variant<KlPenalty, HardConstraint>;

  /// Throws DomainError on a negative target, a non-positive epsilon, or a
  /// KL target with zero entries.
  MarginalPenalty(Axis axis, Kind kind, Vector target);

  static MarginalPenalty kl(Axis axis, Vector target, double epsilon) {
    return MarginalPenalty(axis, KlPenalty{epsilon}, std::move(target));
  }
  /// KL penalty from a log-domain target, for targets whose entries may
  /// underflow in linear scale. target() is then exp(log_target); -inf
  /// entries only accept rows or columns that already carry no mass.
  static MarginalPenalty kl_log(Axis axis, const Vector& log_target, double epsilon);
  static MarginalPenalty hard(Axis axis, Vector target) {
    return MarginalPenalty(axis, HardConstraint{}, std::move(target));
  }

  Axis axis() const { return axis_; }
  const Kind& kind() const { return kind_; }
  bool is_hard() const { return std::holds_alternative<HardConstraint>(kind_); }
  /// Penalty coefficient, or +inf for a hard constraint.
  double epsilon() const;
  const Vector& target() const { return target_; }
  const Vector& log_target() const { return log_target_; }

  /// Applies the matching closed-form prox to a log-domain matrix.
  Matrix apply(const Matrix& log_mu) const;

 private:
  Axis axis_;
  Kind kind_;
  Vector target_;
  Vector log_target_;
};

// All proxes below take and return log-domain matrices. Targets are given in
// linear scale.

/// argmin_m KL(m | mu) + eps1 * KL(m 1 | rho'):
/// rows rescaled so the new state marginal is (rho * rho'^eps1)^(1/(1+eps1)).
/// Throws InfeasibleError on a zero row.
Matrix prox_kl_state(const Matrix& log_mu, const Vector& rho_prime, double epsilon1);

/// Column analogue of prox_kl_state on the action marginal.
Matrix prox_kl_action(const Matrix& log_mu, const Vector& eta_prime, double epsilon2);

/// Row scaling onto the state marginal rho' exactly. A zero target entry
/// zeroes its row; a zero row with positive target throws InfeasibleError.
Matrix prox_hard_state(const Matrix& log_mu, const Vector& rho_prime);

/// Column scaling onto the action marginal eta' exactly.
Matrix prox_hard_action(const Matrix& log_mu, const Vector& eta_prime);

/// Closed-form vector prox of eps * KL(. | target) in log domain:
/// (log m + eps * log target) / (1 + eps).
Vector log_prox_kl_vector(const Vector& log_m, const Vector& log_target, double epsilon);

}  // namespace dcpo
