#include "dcpo/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dcpo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const double kFloor = std::exp(-10.0);

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw DomainError(std::string("config: ") + what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DomainError(std::string("config: ") + what + " must be numeric");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw DomainError(std::string("config: ") + what + " must be a nested array");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw DomainError(std::string("config: ") + what + " rows must have equal length");
    }
    m.row(static_cast<Eigen::Index>(r)) = vector_from_json(j[r], what).transpose();
  }
  return m;
}

// Zero entries become e^-10; small positive ones are kept.
Vector floored(Vector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) <= 0.0) v(i) = kFloor;
  }
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string curve_csv(const std::vector<double>& values) {
  std::ostringstream os;
  os << "sweep,residual\n";
  for (std::size_t i = 0; i < values.size(); ++i) os << i + 1 << ',' << fmt17(values[i]) << '\n';
  return os.str();
}

std::string policy_json(const Policy& policy) {
  std::ostringstream os;
  os << "{\"greedy\": [";
  const std::vector<int> greedy = policy.greedy_actions();
  for (std::size_t i = 0; i < greedy.size(); ++i) os << (i ? ", " : "") << greedy[i];
  os << "], \"pi\": " << format_matrix_json(policy.matrix()) << "}\n";
  return os.str();
}

std::string mu_json(const OccupancyMeasure& mu) {
  std::ostringstream os;
  os << "{\"n_states\": " << mu.n_states() << ", \"n_actions\": " << mu.n_actions()
     << ", \"mu\": " << format_matrix_json(mu.mu()) << "}\n";
  return os.str();
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

struct Runner {
  const ExperimentConfig& config;
  fs::path root;
  std::optional<GridSpec> grid;
  ExperimentOutcome outcome;
  Mdp base;
  /// Set by imitation, whose first run lives on the risk variant.
  std::optional<Mdp> risk_mdp;

  const Mdp& config_mdp_for(const RunRecord& r) const {
    return (risk_mdp && r.name == "risk_unconstrained") ? *risk_mdp : base;
  }

  void check(std::string name, bool passed, std::string detail = {}) {
    outcome.checks.push_back({std::move(name), passed, std::move(detail)});
  }

  std::string render(const Policy& policy, const Mdp& mdp) const {
    return grid ? render_policy(policy, *grid) : render_policy_table(policy, mdp);
  }

  DcpoProblem problem(const Mdp& mdp) const {
    DcpoProblem p{.mdp = mdp, .epsilon = config.epsilon};
    p.stop = config.stop;
    p.projection = config.projection;
    return p;
  }

  const RunRecord& record(const std::string& name, const DcpoProblem& problem, SolveReport report) {
    std::string text = render(report.policy, problem.mdp);
    RunRecord rec{name, fs::path(name), std::move(report), std::move(text), {}, {}};
    if (problem.state_constraint) {
      rec.state_residual = (rec.report.mu.state_marginal() - problem.state_constraint->target()).norm();
    }
    if (problem.action_constraint) {
      rec.action_residual = (rec.report.mu.action_marginal() - problem.action_constraint->target()).norm();
    }
    const fs::path dir = root / rec.directory;
    fs::create_directories(dir);
    write_text(dir / "policy.txt", rec.render + "\n");
    write_text(dir / "policy.json", policy_json(rec.report.policy));
    write_text(dir / "mu.json", mu_json(rec.report.mu));
    const std::vector<double>* primary = &rec.report.sweep_deltas;
    if (!rec.report.action_residual_curve.empty()) primary = &rec.report.action_residual_curve;
    else if (!rec.report.state_residual_curve.empty()) primary = &rec.report.state_residual_curve;
    write_text(dir / "convergence.csv", curve_csv(*primary));
    if (!rec.report.state_residual_curve.empty()) {
      write_text(dir / "convergence_state.csv", curve_csv(rec.report.state_residual_curve));
    }
    if (!rec.report.action_residual_curve.empty()) {
      write_text(dir / "convergence_action.csv", curve_csv(rec.report.action_residual_curve));
    }
    outcome.runs.push_back(std::move(rec));
    return outcome.runs.back();
  }

  const RunRecord& run(const std::string& name, const DcpoProblem& p) { return record(name, p, solve(p)); }

  MarginalPenalty action_penalty(const Vector& target) const {
    if (config.epsilon2) return MarginalPenalty::kl(Axis::action, floored(target), *config.epsilon2);
    return MarginalPenalty::hard(Axis::action, target);
  }

  MarginalPenalty state_penalty(const Vector& target, double default_eps1) const {
    return MarginalPenalty::kl(Axis::state, floored(target), config.epsilon1.value_or(default_eps1));
  }

  int state(Cell c) const { return *grid->state_of(c); }

  void write_manifest() const {
    json runs = json::array();
    for (const RunRecord& r : outcome.runs) {
      runs.push_back({{"name", r.name},
                      {"directory", r.directory.generic_string()},
                      {"converged", r.report.converged},
                      {"sweeps", r.report.iterations},
                      {"expected_return", r.report.expected_return},
                      {"final_state_residual", optional_number(r.state_residual)},
                      {"final_action_residual", optional_number(r.action_residual)},
                      {"flow_residual_inf", flow_residual(r.report.mu, config_mdp_for(r)).lpNorm<Eigen::Infinity>()},
                      {"dual_projections", r.report.dual_stats.projections},
                      {"dual_unconverged", r.report.dual_stats.unconverged},
                      {"render", r.render}});
    }
    json checks = json::array();
    for (const CheckResult& c : outcome.checks) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    json manifest = {{"experiment", to_string(config.experiment)},
                     {"epsilon", config.epsilon},
                     {"stop", {{"frobenius_tol", config.stop.frobenius_tol}, {"max_sweeps", config.stop.max_sweeps}}},
                     {"residual_norm", "euclidean"},
                     {"artifacts", {"policy.txt", "policy.json", "mu.json", "convergence.csv"}},
                     {"runs", runs},
                     {"checks", checks},
                     {"all_converged", outcome.all_converged()},
                     {"checks_passed", outcome.checks_passed()}};
    write_text(root / "manifest.json", manifest.dump(2) + "\n");
  }
};

Runner make_runner(const ExperimentConfig& config, const fs::path& out, bool needs_grid) {
  Runner runner{config, out, config_grid(config), {}, config_mdp(config), std::nullopt};
  if (needs_grid && !runner.grid) throw DomainError("experiment requires a builtin gridworld mdp");
  fs::create_directories(out);
  return runner;
}

std::string cells_differing(const std::string& a, const std::string& b, const GridSpec& spec) {
  // Renders are compared cell by cell over the UTF-8 rows.
  std::ostringstream os;
  std::istringstream ia(a), ib(b);
  std::string ra, rb;
  int row = 0;
  while (std::getline(ia, ra) && std::getline(ib, rb)) {
    std::size_t pa = 0, pb = 0;
    for (int col = 0; col < spec.cols; ++col) {
      auto next = [](const std::string& s, std::size_t& p) {
        std::size_t len = 1;
        const auto c = static_cast<unsigned char>(s[p]);
        if (c >= 0xF0) len = 4;
        else if (c >= 0xE0) len = 3;
        else if (c >= 0xC0) len = 2;
        std::string out = s.substr(p, len);
        p += len;
        return out;
      };
      if (pa >= ra.size() || pb >= rb.size()) break;
      if (next(ra, pa) != next(rb, pb)) os << (os.tellp() > 0 ? " " : "") << "(" << row << "," << col << ")";
    }
    ++row;
  }
  return os.str();
}

}  // namespace

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "solve") return ExperimentKind::solve;
  if (name == "eta_sweep" || name == "eta-sweep") return ExperimentKind::eta_sweep;
  if (name == "rho_sweep" || name == "rho-sweep") return ExperimentKind::rho_sweep;
  if (name == "imitate") return ExperimentKind::imitate;
  if (name == "no_up" || name == "no-up") return ExperimentKind::no_up;
  throw DomainError("unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::solve: return "solve";
    case ExperimentKind::eta_sweep: return "eta_sweep";
    case ExperimentKind::rho_sweep: return "rho_sweep";
    case ExperimentKind::imitate: return "imitate";
    case ExperimentKind::no_up: return "no_up";
  }
  return "solve";
}

json mdp_to_json(const Mdp& mdp) {
  json transition = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) {
    json row = json::array();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const Vector p = mdp.next_state_dist(s, a);
      row.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    }
    transition.push_back(row);
  }
  json reward = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) {
    const Vector r = mdp.reward().row(s).transpose();
    reward.push_back(std::vector<double>(r.data(), r.data() + r.size()));
  }
  const Vector& p0 = mdp.initial_dist();
  return {{"n_states", mdp.n_states()},
          {"n_actions", mdp.n_actions()},
          {"gamma", mdp.discount()},
          {"p0", std::vector<double>(p0.data(), p0.data() + p0.size())},
          {"transition", transition},
          {"reward", reward},
          {"state_labels", mdp.state_labels()},
          {"action_labels", mdp.action_labels()}};
}

Mdp mdp_from_json(const json& j) {
  try {
    const int n_states = j.at("n_states").get<int>();
    const int n_actions = j.at("n_actions").get<int>();
    if (n_states <= 0 || n_actions <= 0) throw DomainError("mdp: sizes must be positive");
    const json& t = j.at("transition");
    if (!t.is_array() || t.size() != static_cast<std::size_t>(n_states)) {
      throw DomainError("mdp: transition must have n_states entries");
    }
    Matrix transition(n_states * n_actions, n_states);
    for (int s = 0; s < n_states; ++s) {
      if (!t[s].is_array() || t[s].size() != static_cast<std::size_t>(n_actions)) {
        throw DomainError("mdp: transition[s] must have n_actions entries");
      }
      for (int a = 0; a < n_actions; ++a) {
        const Vector p = vector_from_json(t[s][a], "transition");
        if (p.size() != n_states) throw DomainError("mdp: transition rows must have n_states entries");
        transition.row(s * n_actions + a) = p.transpose();
      }
    }
    const Matrix reward = matrix_from_json(j.at("reward"), "reward");
    const Vector p0 = vector_from_json(j.at("p0"), "p0");
    std::vector<std::string> state_labels, action_labels;
    if (j.contains("state_labels")) state_labels = j["state_labels"].get<std::vector<std::string>>();
    if (j.contains("action_labels")) action_labels = j["action_labels"].get<std::vector<std::string>>();
    return Mdp(transition, reward, j.at("gamma").get<double>(), p0, state_labels, action_labels);
  } catch (const json::exception& e) {
    throw DomainError(std::string("mdp: ") + e.what());
  }
}

void validate_config(const ExperimentConfig& c) {
  if (!(c.epsilon > 0.0)) throw DomainError("config: epsilon must be positive");
  if (c.epsilon1 && !(*c.epsilon1 > 0.0)) throw DomainError("config: epsilon1 must be positive");
  if (c.epsilon2 && !(*c.epsilon2 > 0.0)) throw DomainError("config: epsilon2 must be positive");
  if (!(c.stop.frobenius_tol > 0.0) || c.stop.max_sweeps <= 0) throw DomainError("config: invalid stop rule");
  for (double a : c.alphas) {
    if (!(a >= 0.0 && a <= 0.5)) throw DomainError("config: alphas must lie in [0, .5]");
  }
  if (c.experiment != ExperimentKind::solve && c.mdp) {
    throw DomainError("config: " + to_string(c.experiment) + " runs on the builtin gridworld only");
  }
  if (c.experiment != ExperimentKind::solve && !c.constraints.empty()) {
    throw DomainError("config: constraints apply to the solve experiment only");
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("config: expected a JSON object");
  ExperimentConfig c;
  try {
    c.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    if (j.contains("mdp")) {
      const json& m = j["mdp"];
      if (m.is_string()) {
        c.builtin = m.get<std::string>();
        if (c.builtin != "gridworld" && c.builtin != "gridworld_risk") {
          throw DomainError("config: unknown builtin mdp '" + c.builtin + "'");
        }
      } else {
        c.mdp = mdp_from_json(m);
        c.builtin.clear();
      }
    }
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("epsilon1")) c.epsilon1 = j["epsilon1"].get<double>();
    if (j.contains("epsilon2")) c.epsilon2 = j["epsilon2"].get<double>();
    if (j.contains("alphas")) c.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("constraints")) {
      for (const json& k : j["constraints"]) {
        ConstraintConfig cc;
        const std::string axis = k.at("axis").get<std::string>();
        if (axis == "state") cc.axis = Axis::state;
        else if (axis == "action") cc.axis = Axis::action;
        else throw DomainError("config: constraint axis must be state or action");
        const std::string kind = k.value("kind", std::string("hard"));
        if (kind != "hard" && kind != "kl") throw DomainError("config: constraint kind must be hard or kl");
        cc.hard = kind == "hard";
        cc.epsilon = k.value("epsilon", 1.0);
        cc.target = vector_from_json(k.at("target"), "target");
        c.constraints.push_back(std::move(cc));
      }
    }
    if (j.contains("stop")) {
      const json& s = j["stop"];
      c.stop.frobenius_tol = s.value("tol", c.stop.frobenius_tol);
      c.stop.max_sweeps = s.value("max_sweeps", c.stop.max_sweeps);
    }
    if (j.contains("projection")) {
      const json& p = j["projection"];
      c.projection.tol = p.value("tol", c.projection.tol);
      c.projection.max_iterations = p.value("max_iterations", c.projection.max_iterations);
      const std::string method = p.value("method", std::string("newton"));
      if (method == "newton") c.projection.method = DualMethod::newton;
      else if (method == "gradient_descent") c.projection.method = DualMethod::gradient_descent;
      else throw DomainError("config: unknown projection method '" + method + "'");
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<long long>();
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

std::optional<GridSpec> config_grid(const ExperimentConfig& config) {
  if (config.mdp) return std::nullopt;
  return GridSpec::for_variant(config.builtin == "gridworld_risk" ? GridVariant::risk_averse
                                                                  : GridVariant::standard);
}

Mdp config_mdp(const ExperimentConfig& config) {
  if (config.mdp) return *config.mdp;
  return build_gridworld(*config_grid(config));
}

std::vector<double> default_alphas() { return {kFloor, .1, .2, .25, .3, .4, .5 - kFloor}; }

Vector eta_target(double alpha) {
  Vector eta(4);
  eta << alpha, .5 - alpha, .5 - alpha, alpha;
  return eta;
}

Vector concentrated_state_target(const GridSpec& spec, Cell cell) {
  const auto s = spec.state_of(cell);
  if (!s) throw DomainError("target cell is not a state");
  Vector rho = Vector::Constant(spec.n_states(), .1 / (spec.n_states() - 1));
  rho(*s) = .9;
  return rho;
}

bool ExperimentOutcome::all_converged() const {
  for (const RunRecord& r : runs) {
    if (!r.report.converged) return false;
  }
  return true;
}

bool ExperimentOutcome::checks_passed() const {
  for (const CheckResult& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::string format_matrix_json(const Matrix& m) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << (r ? ", [" : "[");
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << fmt17(m(r, c));
    os << ']';
  }
  os << ']';
  return os.str();
}

std::string render_policy_table(const Policy& policy, const Mdp& mdp) {
  std::ostringstream os;
  const std::vector<int> greedy = policy.greedy_actions();
  for (std::size_t s = 0; s < greedy.size(); ++s) {
    const auto& sl = mdp.state_labels();
    const auto& al = mdp.action_labels();
    os << (s ? "\n" : "") << (s < sl.size() ? sl[s] : std::to_string(s)) << ' '
       << (static_cast<std::size_t>(greedy[s]) < al.size() ? al[greedy[s]] : std::to_string(greedy[s]));
  }
  return os.str();
}

ExperimentOutcome run_solve(const ExperimentConfig& config, const fs::path& out) {
  Runner r = make_runner(config, out, false);
  DcpoProblem p = r.problem(r.base);
  for (const ConstraintConfig& c : config.constraints) {
    const Vector target = c.hard ? c.target : floored(c.target);
    MarginalPenalty penalty = c.hard ? MarginalPenalty::hard(c.axis, target)
                                     : MarginalPenalty::kl(c.axis, target, c.epsilon);
    auto& slot = c.axis == Axis::state ? p.state_constraint : p.action_constraint;
    if (slot) throw DomainError("config: at most one constraint per axis");
    slot = std::move(penalty);
  }
  const RunRecord& rec = r.run("solve", p);
  r.check("converged", rec.report.converged, std::to_string(rec.report.iterations) + " sweeps");
  r.write_manifest();
  return std::move(r.outcome);
}

ExperimentOutcome run_eta_sweep(const ExperimentConfig& config, const fs::path& out) {
  Runner r = make_runner(config, out, true);
  if (r.base.n_actions() != 4) throw DomainError("eta sweep needs four actions");
  const std::vector<double> alphas = config.alphas.empty() ? default_alphas() : config.alphas;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const Vector eta = eta_target(alphas[i]);
    DcpoProblem p = r.problem(r.base);
    p.action_constraint = r.action_penalty(eta);
    const RunRecord& rec = r.run("eta_" + std::to_string(i + 1), p);
    const double inf_res = (rec.report.mu.action_marginal() - eta).lpNorm<Eigen::Infinity>();
    r.check(rec.name + "/converged", rec.report.converged, std::to_string(rec.report.iterations) + " sweeps");
    r.check(rec.name + "/action_residual", inf_res <= 1e-5, "inf-norm " + fmt17(inf_res));
    const std::vector<int> greedy = rec.report.policy.greedy_actions();
    if (alphas[i] == kFloor) {
      r.check(rec.name + "/down_at_0_2", greedy[r.state({0, 2})] == kDown);
    } else if (alphas[i] == .1) {
      r.check(rec.name + "/right_at_0_2", greedy[r.state({0, 2})] == kRight);
    } else if (alphas[i] == .5 - kFloor) {
      r.check(rec.name + "/up_at_2_3", greedy[r.state({2, 3})] == kUp);
    }
  }
  r.write_manifest();
  return std::move(r.outcome);
}

ExperimentOutcome run_rho_sweep(const ExperimentConfig& config, const fs::path& out) {
  Runner r = make_runner(config, out, true);
  const RunRecord& base = r.run("unconstrained", r.problem(r.base));
  const Vector base_rho = base.report.mu.state_marginal();
  const Cell targets[] = {{0, 2}, {1, 2}, {2, 3}};
  for (std::size_t i = 0; i < 3; ++i) {
    const Cell cell = targets[i];
    DcpoProblem p = r.problem(r.base);
    p.state_constraint = r.state_penalty(concentrated_state_target(*r.grid, cell), 10.0);
    const RunRecord& rec = r.run("rho_" + std::to_string(i + 1), p);
    const int s = r.state(cell);
    r.check(rec.name + "/converged", rec.report.converged, std::to_string(rec.report.iterations) + " sweeps");
    r.check(rec.name + "/residual_positive", *rec.state_residual > 1e-3, fmt17(*rec.state_residual));
    const double rho_s = rec.report.mu.state_marginal()(s);
    r.check(rec.name + "/mass_moves_to_target", rho_s > base_rho(s),
            fmt17(rho_s) + " vs " + fmt17(base_rho(s)));
  }
  r.write_manifest();
  return std::move(r.outcome);
}

ExperimentOutcome run_imitate(const ExperimentConfig& config, const fs::path& out) {
  Runner r = make_runner(config, out, true);
  GridSpec standard = GridSpec::for_variant(GridVariant::standard);
  r.grid = standard;
  r.base = build_gridworld(standard);
  r.risk_mdp = build_gridworld(GridVariant::risk_averse);

  const RunRecord& first = r.run("risk_unconstrained", r.problem(*r.risk_mdp));
  const OccupancyMeasure mu1 = occupancy_from_policy(*r.risk_mdp, first.report.policy);
  const Vector eta1 = mu1.action_marginal();
  const Vector rho1 = mu1.state_marginal();
  const std::string pi1 = first.render;
  r.check("eta1_normalized", std::abs(eta1.sum() - 1.0) <= 1e-9, fmt17(eta1.sum()));

  DcpoProblem pa = r.problem(r.base);
  pa.action_constraint = r.action_penalty(eta1);
  const RunRecord& second = r.run("action_imitation", pa);
  const double inf_res = (second.report.mu.action_marginal() - eta1).lpNorm<Eigen::Infinity>();
  r.check("action_imitation/converged", second.report.converged);
  r.check("action_imitation/action_residual", inf_res <= 1e-5, "inf-norm " + fmt17(inf_res));
  const std::string diff = cells_differing(pi1, second.render, standard);
  r.check("action_imitation/differs_from_pi1", !diff.empty(), diff);

  DcpoProblem pb = r.problem(r.base);
  pb.state_constraint = r.state_penalty(rho1, 100.0);
  const RunRecord& third = r.run("state_imitation", pb);
  r.check("state_imitation/converged", third.report.converged);
  r.check("state_imitation/same_as_pi1", third.render == pi1, cells_differing(pi1, third.render, standard));
  r.write_manifest();
  return std::move(r.outcome);
}

ExperimentOutcome run_no_up(const ExperimentConfig& config, const fs::path& out) {
  Runner r = make_runner(config, out, true);
  if (r.base.n_actions() != 4) throw DomainError("no-up needs four actions");
  const double a = (1.0 - kFloor) / 3.0;
  Vector eta(4);
  eta << kFloor, a, a, a;
  DcpoProblem p1 = r.problem(r.base);
  p1.action_constraint = r.action_penalty(eta);
  DcpoProblem p2 = p1;
  p2.state_constraint = r.state_penalty(concentrated_state_target(*r.grid, {0, 2}), 10.0);

  const RunRecord& only = r.run("eta_only", p1);
  const double up = only.report.mu.action_marginal()(kUp);
  const double rho_only = only.report.mu.state_marginal()(r.state({0, 2}));
  const RunRecord& joint = r.run("eta_and_rho", p2);
  const double rho_joint = joint.report.mu.state_marginal()(r.state({0, 2}));
  r.check("eta_only/converged", only.report.converged);
  r.check("eta_and_rho/converged", joint.report.converged);
  r.check("eta_only/up_mass", up <= 2.0 * kFloor, fmt17(up));
  r.check("eta_and_rho/rho_0_2_increases", rho_joint > rho_only, fmt17(rho_joint) + " vs " + fmt17(rho_only));
  r.write_manifest();
  return std::move(r.outcome);
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const fs::path& out) {
  switch (config.experiment) {
    case ExperimentKind::solve: return run_solve(config, out);
    case ExperimentKind::eta_sweep: return run_eta_sweep(config, out);
    case ExperimentKind::rho_sweep: return run_rho_sweep(config, out);
    case ExperimentKind::imitate: return run_imitate(config, out);
    case ExperimentKind::no_up: return run_no_up(config, out);
  }
  throw DomainError("unknown experiment");
}

}  // namespace dcpo
