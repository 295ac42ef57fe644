#pragma once

#include "dcpo/mdp.hpp"

#include <random>

namespace testing {

using dcpo::Matrix;
using dcpo::Vector;

inline Vector random_simplex(std::mt19937& rng, int n, double floor = 0.0) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng) + floor;
  return v / v.sum();
}

inline Matrix random_positive(std::mt19937& rng, int rows, int cols, double lo = 0.05, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline dcpo::Mdp random_mdp(std::mt19937& rng, int n_states, int n_actions, double gamma = 0.9) {
  Matrix p(n_states * n_actions, n_states);
  for (int r = 0; r < p.rows(); ++r) p.row(r) = random_simplex(rng, n_states, 0.05).transpose();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix reward(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) reward(s, a) = u(rng);
  return dcpo::Mdp(p, reward, gamma, random_simplex(rng, n_states, 0.05));
}

inline dcpo::Policy random_policy(std::mt19937& rng, int n_states, int n_actions, double floor = 0.0) {
  Matrix pi(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) pi.row(s) = random_simplex(rng, n_actions, floor).transpose();
  return dcpo::Policy(pi);
}

// Discounted state distribution by summing the series to t = horizon.
inline Vector power_series_rho(const dcpo::Mdp& mdp, const dcpo::Policy& pi, int horizon) {
  const int S = mdp.n_states(), A = mdp.n_actions();
  Matrix pp = Matrix::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int t = 0; t < S; ++t) pp(s, t) += pi(s, a) * mdp.transition()(s * A + a, t);
  Vector term = mdp.initial_dist();
  Vector rho = Vector::Zero(S);
  double w = 1.0;
  for (int t = 0; t <= horizon; ++t) {
    rho += w * term;
    term = pp.transpose() * term;
    w *= mdp.discount();
  }
  return (1.0 - mdp.discount()) * rho;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
