#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dcpo {

/// Dense row-major matrix. State-action quantities are |S| x |A|; the
/// transition tensor is stored as |S||A| x |S| with row index s * |A| + a.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, probabilities that do not sum to one,
/// support violations in a divergence.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A projection whose target cannot be reached from the given support,
/// e.g. a hard marginal asking for mass on an all-zero row.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// log(sum(exp(x))) over any Eigen expression; -inf for an all -inf input.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  const double c = x.maxCoeff();
  if (c == kNegInf) return kNegInf;
  return c + std::log((x.derived().array() - c).exp().sum());
}

/// Row-wise log-sum-exp of a log-domain matrix.
inline Vector log_row_sums(const Matrix& log_m) {
  Vector out(log_m.rows());
  for (Eigen::Index i = 0; i < log_m.rows(); ++i) out(i) = log_sum_exp(log_m.row(i));
  return out;
}

/// Column-wise log-sum-exp of a log-domain matrix.
inline Vector log_col_sums(const Matrix& log_m) {
  Vector out(log_m.cols());
  for (Eigen::Index j = 0; j < log_m.cols(); ++j) out(j) = log_sum_exp(log_m.col(j));
  return out;
}

/// Entrywise log with log(0) = -inf.
template <typename Derived>
auto safe_log(const Eigen::MatrixBase<Derived>& m) {
  return m.unaryExpr([](double v) { return v > 0.0 ? std::log(v) : kNegInf; });
}

}  // namespace dcpo
