#include "dcpo/experiments.hpp"

#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace dcpo;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dcpo_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("mdp json round trip") {
  std::mt19937 rng(1);
  Mdp mdp = testing::random_mdp(rng, 3, 2);
  Mdp back = mdp_from_json(json::parse(mdp_to_json(mdp).dump()));
  CHECK(back.transition() == mdp.transition());
  CHECK(back.reward() == mdp.reward());
  CHECK(back.initial_dist() == mdp.initial_dist());
  CHECK(back.discount() == mdp.discount());

  Mdp grid = build_gridworld();
  Mdp grid_back = mdp_from_json(mdp_to_json(grid));
  CHECK(grid_back.state_labels() == grid.state_labels());
  CHECK(grid_back.action_labels() == grid.action_labels());

  json bad = mdp_to_json(mdp);
  bad["transition"][0][0][0] = 2.0;
  CHECK_THROWS_AS(mdp_from_json(bad), DomainError);
  bad = mdp_to_json(mdp);
  bad.erase("gamma");
  CHECK_THROWS_AS(mdp_from_json(bad), DomainError);
}

TEST_CASE("config parsing") {
  ExperimentConfig c = config_from_json(json::parse(R"({
    "experiment": "solve", "mdp": "gridworld_risk", "epsilon": 0.05,
    "constraints": [{"axis": "action", "kind": "hard", "target": [0.25, 0.25, 0.25, 0.25]}],
    "stop": {"tol": 1e-6, "max_sweeps": 100}, "seed": 7})"));
  CHECK(c.experiment == ExperimentKind::solve);
  CHECK(c.builtin == "gridworld_risk");
  CHECK(config_grid(c)->entry_reward_of({1, 3}) == -10.0);
  CHECK(c.epsilon == .05);
  CHECK(c.constraints.size() == 1);
  CHECK(c.stop.frobenius_tol == 1e-6);
  CHECK(c.stop.max_sweeps == 100);

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"mdp": "gridworld"})")), DomainError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"experiment": "dance"})")), DomainError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"experiment": "solve", "mdp": "maze"})")), DomainError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"experiment": "solve", "epsilon": -1})")), DomainError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"experiment": "eta_sweep", "alphas": [0.7]})")), DomainError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), DomainError);

  json inline_cfg = {{"experiment", "solve"}, {"mdp", mdp_to_json(build_gridworld())}};
  ExperimentConfig ic = config_from_json(inline_cfg);
  CHECK(ic.mdp.has_value());
  CHECK_FALSE(config_grid(ic).has_value());
  inline_cfg["experiment"] = "imitate";
  CHECK_THROWS_AS(config_from_json(inline_cfg), DomainError);
}

TEST_CASE("targets") {
  const std::vector<double> a = default_alphas();
  REQUIRE(a.size() == 7);
  CHECK(a.front() == std::exp(-10.0));
  CHECK(eta_target(.1).sum() == doctest::Approx(1.0));
  Vector rho = concentrated_state_target(GridSpec{}, {0, 2});
  CHECK(rho.sum() == doctest::Approx(1.0));
  CHECK(rho(2) == .9);
  CHECK(rho(0) == doctest::Approx(.01));
}

TEST_CASE("solve artifacts are complete and deterministic") {
  ExperimentConfig c;
  c.constraints.push_back({Axis::action, true, 1.0, eta_target(.25)});
  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  ExperimentOutcome out = run_experiment(c, a);
  run_experiment(c, b);
  REQUIRE(out.runs.size() == 1);
  CHECK(out.all_converged());
  for (const char* f : {"manifest.json", "solve/policy.txt", "solve/policy.json", "solve/mu.json",
                        "solve/convergence.csv", "solve/convergence_action.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }

  const json mu = json::parse(slurp(a / "solve/mu.json"));
  Matrix m(11, 4);
  for (int s = 0; s < 11; ++s)
    for (int k = 0; k < 4; ++k) m(s, k) = mu["mu"][s][k].get<double>();
  CHECK(m == out.runs[0].report.mu.mu());
  CHECK(flow_residual(m, build_gridworld()).cwiseAbs().maxCoeff() <= 1e-7);

  std::istringstream csv(slurp(a / "solve/convergence.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "sweep,residual");
  int rows = 0, last = 0;
  while (std::getline(csv, line)) {
    const int idx = std::stoi(line.substr(0, line.find(',')));
    CHECK(idx == last + 1);
    last = idx;
    ++rows;
  }
  CHECK(rows == out.runs[0].report.iterations);

  const json manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["residual_norm"] == "euclidean");
  CHECK(manifest["runs"][0]["converged"] == true);
  CHECK(manifest["runs"][0]["sweeps"] == out.runs[0].report.iterations);
  CHECK(manifest["runs"][0]["final_action_residual"].is_number());
  const std::string render = slurp(a / "solve/policy.txt");
  CHECK(std::count(render.begin(), render.end(), '\n') == 3);
}

TEST_CASE("no-up experiment") {
  ExperimentConfig c;
  c.experiment = ExperimentKind::no_up;
  const fs::path dir = scratch_dir("noup");
  ExperimentOutcome out = run_experiment(c, dir);
  REQUIRE(out.runs.size() == 2);
  CHECK(out.all_converged());
  CHECK(out.checks_passed());
  for (const RunRecord& r : out.runs) {
    CHECK(fs::exists(dir / r.directory / "policy.txt"));
    CHECK(fs::exists(dir / r.directory / "mu.json"));
    CHECK(fs::exists(dir / r.directory / "convergence.csv"));
  }
}

TEST_CASE("inline mdp renders as a table") {
  std::mt19937 rng(2);
  ExperimentConfig c;
  c.mdp = testing::random_mdp(rng, 3, 2);
  ExperimentOutcome out = run_experiment(c, scratch_dir("inline"));
  REQUIRE(out.runs.size() == 1);
  CHECK(std::count(out.runs[0].render.begin(), out.runs[0].render.end(), '\n') == 2);
}
