#include "dcpo/delta_projection.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace dcpo;
using testing::max_abs;

namespace {

Matrix lg(const Matrix& m) { return safe_log(m); }

// Plain exp/sum evaluation of the dual, no log-sum-exp.
double naive_dual(const Mdp& mdp, const Matrix& mu, const Vector& v) {
  const int S = mdp.n_states(), A = mdp.n_actions();
  const double g = mdp.discount();
  double z = 0.0;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double pv = 0.0;
      for (int t = 0; t < S; ++t) pv += mdp.transition()(s * A + a, t) * v(t);
      z += mu(s, a) * std::exp(g * pv - v(s));
    }
  }
  double lin = 0.0;
  for (int s = 0; s < S; ++s) lin += mdp.initial_dist()(s) * v(s);
  return std::log(z) + (1 - g) * lin;
}

double entropic_objective(const Matrix& mu, const Matrix& reward, double eps) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double m = mu.data()[i];
    if (m > 0) f += m * (reward.data()[i] / eps - std::log(m));
  }
  return f;
}

}  // namespace

TEST_CASE("dual objective basics") {
  std::mt19937 rng(1);
  Mdp mdp = testing::random_mdp(rng, 3, 2);
  const Matrix mu = testing::random_positive(rng, 3, 2);
  CHECK(dual_objective(mdp, lg(mu), Vector::Zero(3)) == doctest::Approx(std::log(mu.sum())).epsilon(1e-15));
  const Vector v = Vector::Random(3);
  CHECK(std::abs(dual_objective(mdp, lg(mu), v) - dual_objective(mdp, lg(mu), Vector(v.array() + 7.3))) <= 1e-10);
}

TEST_CASE("dual objective against naive summation") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Mdp mdp = testing::random_mdp(rng, 2, 2);
    const Matrix mu = testing::random_positive(rng, 2, 2);
    Vector v(2);
    v << u(rng), u(rng);
    CHECK(std::abs(dual_objective(mdp, lg(mu), v) - naive_dual(mdp, mu, v)) <= 1e-12);
  }
}

TEST_CASE("dual gradient and hessian against finite differences") {
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 30; ++trial) {
    Mdp mdp = testing::random_mdp(rng, 3, 2);
    const Matrix log_mu = lg(testing::random_positive(rng, 3, 2));
    Vector v(3);
    for (int i = 0; i < 3; ++i) v(i) = n(rng);
    const Vector g = dual_gradient(mdp, log_mu, v);
    const Matrix hess = dual_hessian(mdp, log_mu, v);
    for (int i = 0; i < 3; ++i) {
      Vector vp = v, vm = v;
      vp(i) += h;
      vm(i) -= h;
      const double fd = (dual_objective(mdp, log_mu, vp) - dual_objective(mdp, log_mu, vm)) / (2 * h);
      CHECK(std::abs(fd - g(i)) <= 1e-6 * std::max(1.0, std::abs(g(i))));
      const Vector fd_row = (dual_gradient(mdp, log_mu, vp) - dual_gradient(mdp, log_mu, vm)) / (2 * h);
      CHECK((fd_row - hess.row(i).transpose()).cwiseAbs().maxCoeff() <= 1e-6);
    }
    CHECK(std::abs(g.sum()) <= 1e-14);
  }
}

TEST_CASE("projection of a member is the identity") {
  std::mt19937 rng(4);
  Mdp mdp = testing::random_mdp(rng, 4, 3);
  const Matrix mu = occupancy_from_policy(mdp, testing::random_policy(rng, 4, 3, .05)).mu();
  DeltaProjection p = project_onto_delta(mdp, lg(mu));
  CHECK(p.dual.converged);
  CHECK(max_abs(p.mu.mu() - mu) <= 1e-8);
  CHECK(p.dual.v.cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("entropic optimum on two-state mdps against a policy grid") {
  std::mt19937 rng(5);
  const double eps = 1.0;
  for (int trial = 0; trial < 3; ++trial) {
    Mdp mdp = testing::random_mdp(rng, 2, 2, 0.8);
    const Matrix log_xi = mdp.reward() / eps;
    DeltaProjection p = project_onto_delta(mdp, log_xi);
    const double found = entropic_objective(p.mu.mu(), mdp.reward(), eps);
    double best = -1e300;
    for (int i = 0; i <= 1000; ++i) {
      for (int j = 0; j <= 1000; ++j) {
        Matrix pi(2, 2);
        pi << i * 1e-3, 1 - i * 1e-3, j * 1e-3, 1 - j * 1e-3;
        best = std::max(best, entropic_objective(occupancy_from_policy(mdp, Policy(pi)).mu(), mdp.reward(), eps));
      }
    }
    CHECK(found >= best - 1e-6);
    CHECK(found <= best + 1e-6);
  }
}

TEST_CASE("infeasible support") {
  // Both actions of state 0 lead to state 1, which has no mass in mu.
  Matrix p(4, 2);
  p << 0., 1.,
       0., 1.,
       0., 1.,
       1., 0.;
  Vector p0(2);
  p0 << 1., 0.;
  Mdp mdp(p, Matrix::Zero(2, 2), .9, p0);
  Matrix mu(2, 2);
  mu << .5, .5, 0., 0.;
  CHECK_FALSE(support_is_feasible(mdp, lg(mu)));
  CHECK_THROWS_AS(project_onto_delta(mdp, lg(mu)), InfeasibleError);
  mu(1, 1) = .1;
  CHECK(support_is_feasible(mdp, lg(mu)));
  CHECK(flow_residual(project_onto_delta(mdp, lg(mu)).mu, mdp).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("gradient descent agrees with newton") {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    Mdp mdp = testing::random_mdp(rng, 4, 2);
    const Matrix log_mu = lg(testing::random_positive(rng, 4, 2));
    ProjectionOptions gd;
    gd.method = DualMethod::gradient_descent;
    gd.tol = 1e-7;
    DeltaProjection a = project_onto_delta(mdp, log_mu, gd);
    DeltaProjection b = project_onto_delta(mdp, log_mu);
    CHECK(a.dual.converged);
    CHECK(b.dual.converged);
    CHECK(max_abs(a.mu.mu() - b.mu.mu()) <= 10 * gd.tol);
  }
}

TEST_CASE("property: dual convexity along segments") {
  std::mt19937 rng(7);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Mdp mdp = testing::random_mdp(rng, 4, 3);
    const Matrix log_mu = lg(testing::random_positive(rng, 4, 3));
    Vector v1(4), v2(4);
    for (int i = 0; i < 4; ++i) {
      v1(i) = n(rng);
      v2(i) = n(rng);
    }
    const double mid = dual_objective(mdp, log_mu, (v1 + v2) / 2);
    CHECK(mid <= (dual_objective(mdp, log_mu, v1) + dual_objective(mdp, log_mu, v2)) / 2 + 1e-12);
  }
}

TEST_CASE("property: monotone descent, feasibility and optimality") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Mdp mdp = testing::random_mdp(rng, 5, 3, 0.95);
    const Matrix mu = testing::random_positive(rng, 5, 3, .01, 5.0);
    ProjectionOptions opt;
    opt.record_objective = true;
    for (DualMethod method : {DualMethod::newton, DualMethod::gradient_descent}) {
      opt.method = method;
      opt.tol = method == DualMethod::newton ? 1e-9 : 1e-7;
      DeltaProjection p = project_onto_delta(mdp, lg(mu), opt);
      const auto& h = p.dual.objective_history;
      for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1] + 1e-14 * (1 + std::abs(h[k - 1])));
      CHECK(p.dual.converged);
      CHECK(flow_residual(p.mu, mdp).cwiseAbs().maxCoeff() <= 10 * opt.tol);
      CHECK(std::abs(p.mu.total_mass() - 1.0) <= 1e-12);
    }
    const Matrix best = project_onto_delta(mdp, lg(mu)).mu.mu();
    const double kl_best = kl_divergence(best, mu);
    for (int k = 0; k < 100; ++k) {
      const Matrix other = occupancy_from_policy(mdp, testing::random_policy(rng, 5, 3)).mu();
      CHECK(kl_best <= kl_divergence(other, mu));
    }
  }
}
