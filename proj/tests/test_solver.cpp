#include "dcpo/gridworld.hpp"
#include "dcpo/solver.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace dcpo;
using testing::max_abs;

namespace {

const double kE10 = std::exp(-10.0);

Vector eta(double a) {
  Vector v(4);
  v << a, .5 - a, .5 - a, a;
  return v;
}

void check_feasible(const SolveReport& r, const Mdp& mdp) {
  CHECK(flow_residual(r.mu, mdp).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(std::abs(r.mu.total_mass() - 1.0) <= 1e-8);
  CHECK(r.policy.matrix() == policy_from_occupancy(r.mu).matrix());
}

// Best deterministic policy by enumeration, scored by the normalized return.
double best_deterministic_return(const Mdp& mdp) {
  const int S = mdp.n_states(), A = mdp.n_actions();
  std::vector<int> acts(S, 0);
  double best = -1e300;
  while (true) {
    best = std::max(best, expected_return(occupancy_from_policy(mdp, Policy::deterministic(acts, A)), mdp));
    int k = 0;
    while (k < S && ++acts[k] == A) acts[k++] = 0;
    if (k == S) break;
  }
  return best;
}

}  // namespace

TEST_CASE("unconstrained gridworld matches value iteration") {
  GridSpec g;
  Mdp mdp = build_gridworld(g);
  SolveReport r = solve(DcpoProblem{.mdp = mdp, .epsilon = .01});
  CHECK(r.converged);
  check_feasible(r, mdp);
  const Policy vi = soft_value_iteration_oracle(mdp);
  CHECK(r.policy.greedy_actions() == vi.greedy_actions());
  CHECK(render_policy(r.policy, g).find("↓") == std::string::npos);
  const double vi_return = (1 - mdp.discount()) * mdp.initial_dist().dot(policy_value(mdp, vi));
  CHECK(std::abs(r.expected_return - vi_return) <= 1e-3);
}

TEST_CASE("projection of the reward kernel matches value iteration") {
  Mdp mdp = build_gridworld();
  DeltaProjection p = project_onto_delta(mdp, reward_kernel_log(mdp, .01));
  CHECK(policy_from_occupancy(p.mu).greedy_actions() == soft_value_iteration_oracle(mdp).greedy_actions());
}

TEST_CASE("hard action marginals steer the gridworld policy") {
  GridSpec g;
  Mdp mdp = build_gridworld(g);
  DcpoProblem p{.mdp = mdp, .epsilon = .01};
  p.action_constraint = MarginalPenalty::hard(Axis::action, eta(kE10));
  SolveReport first = solve(p);
  CHECK(first.converged);
  check_feasible(first, mdp);
  CHECK(first.policy.greedy_actions()[*g.state_of({0, 2})] == kDown);
  CHECK(first.action_residual_curve.size() == static_cast<std::size_t>(first.iterations));

  p.action_constraint = MarginalPenalty::hard(Axis::action, eta(.5 - kE10));
  SolveReport last = solve(p);
  CHECK(last.converged);
  check_feasible(last, mdp);
  CHECK(last.policy.greedy_actions()[*g.state_of({2, 3})] == kUp);
}

TEST_CASE("unreachable state target leaves a residual") {
  GridSpec g;
  Mdp mdp = build_gridworld(g);
  Vector rho = Vector::Constant(11, .01);
  rho(*g.state_of({2, 3})) = .9;
  DcpoProblem p{.mdp = mdp, .epsilon = .01};
  p.state_constraint = MarginalPenalty::kl(Axis::state, rho, 10.0);
  SolveReport r = solve(p);
  CHECK(r.converged);
  check_feasible(r, mdp);
  REQUIRE(r.state_residual_curve.size() >= 10);
  const auto& c = r.state_residual_curve;
  CHECK(c.back() > 1e-3);
  CHECK(std::abs(c.back() - c[c.size() - 10]) <= 1e-4);
}

TEST_CASE("baseline preset") {
  std::mt19937 rng(1);
  Mdp mdp = testing::random_mdp(rng, 3, 2);
  OccupancyMeasure base = occupancy_from_policy(mdp, testing::random_policy(rng, 3, 2, .1));
  DcpoProblem p{.mdp = mdp, .epsilon = .5};
  p.baseline = base;
  SolveReport r = solve(p);
  const Matrix expected = project_onto_delta(mdp, Matrix(base.log_mu() + mdp.reward() / .5)).mu.mu();
  CHECK(max_abs(r.mu.mu() - expected) <= 1e-9);
}

TEST_CASE("constraint assembly") {
  std::mt19937 rng(2);
  Mdp mdp = testing::random_mdp(rng, 3, 2);
  DcpoProblem p{.mdp = mdp};
  p.action_constraint = MarginalPenalty::hard(Axis::action, Vector::Constant(2, .5));
  p.state_constraint = MarginalPenalty::kl(Axis::state, Vector::Constant(3, 1.0 / 3), 1.0);
  auto cs = assemble_constraints(p);
  REQUIRE(cs.size() == 3);
  CHECK(std::get<MarginalPenalty>(cs[0]).axis() == Axis::state);
  CHECK(std::get<MarginalPenalty>(cs[1]).axis() == Axis::action);
  CHECK(std::holds_alternative<OccupancyConstraint>(cs[2]));

  p.state_constraint = MarginalPenalty::kl(Axis::action, Vector::Constant(2, .5), 1.0);
  CHECK_THROWS_AS(assemble_constraints(p), DomainError);
  p.state_constraint.reset();
  p.action_constraint = MarginalPenalty::hard(Axis::action, Vector::Constant(3, 1.0 / 3));
  CHECK_THROWS_AS(assemble_constraints(p), DomainError);
  CHECK_THROWS_AS(reward_kernel_log(mdp, 0.0), DomainError);
}

TEST_CASE("outer loop fixed point") {
  Mdp mdp = build_gridworld();
  const OccupancyMeasure opt = occupancy_from_policy(mdp, soft_value_iteration_oracle(mdp));
  OuterOptions o;
  o.k_max = 1;
  o.initial = opt;
  auto traj = iterate_outer(mdp, o);
  REQUIRE(traj.size() == 1);
  CHECK(max_abs(traj[0].mu.mu() - opt.mu()) <= 1e-6);

  o.initial = OccupancyMeasure::from_linear(Matrix::Zero(11, 4), false);
  CHECK_THROWS_AS(iterate_outer(mdp, o), DomainError);
}

TEST_CASE("outer loop improves monotonically") {
  Mdp mdp = build_gridworld();
  OuterOptions o;
  o.k_max = 20;
  o.stop.frobenius_tol = 1e-8;
  auto traj = iterate_outer(mdp, o);
  REQUIRE(traj.size() == 20);
  double prev = expected_return(occupancy_from_policy(mdp, Policy::uniform(11, 4)), mdp);
  for (const SolveReport& r : traj) {
    CHECK(r.expected_return >= prev - 1e-8);
    check_feasible(r, mdp);
    prev = r.expected_return;
  }
}

TEST_CASE("outer loop reaches the optimum on two-state mdps") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    Mdp mdp = testing::random_mdp(rng, 2, 2, 0.9);
    OuterOptions o;
    o.k_max = 50;
    o.stop.frobenius_tol = 1e-9;
    auto traj = iterate_outer(mdp, o);
    double prev = -1e300;
    for (const SolveReport& r : traj) {
      CHECK(r.expected_return >= prev - 1e-8);
      prev = r.expected_return;
    }
    CHECK(std::abs(traj.back().expected_return - best_deterministic_return(mdp)) <= 1e-4);
  }
}
