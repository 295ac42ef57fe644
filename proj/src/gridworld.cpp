#include "dcpo/gridworld.hpp"

#include <algorithm>
#include <array>

namespace dcpo {

namespace {

constexpr std::array<std::pair<int, int>, 4> kMoves{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
constexpr std::array<std::pair<int, int>, 4> kPerpendicular{
    {{kLeft, kRight}, {kLeft, kRight}, {kUp, kDown}, {kUp, kDown}}};
constexpr std::array<const char*, 4> kArrows{"↑", "↓", "←", "→"};
constexpr std::array<const char*, 4> kActionNames{"up", "down", "left", "right"};

}  // namespace

GridSpec GridSpec::for_variant(GridVariant variant) {
  GridSpec spec;
  if (variant == GridVariant::risk_averse) spec.entry_reward = {{{0, 3}, 1.0}, {{1, 3}, -10.0}};
  return spec;
}

bool GridSpec::is_blocked(Cell c) const {
  return std::find(blocked.begin(), blocked.end(), c) != blocked.end();
}

bool GridSpec::is_terminal(Cell c) const {
  return std::find(terminal.begin(), terminal.end(), c) != terminal.end();
}

double GridSpec::entry_reward_of(Cell c) const {
  for (const auto& [cell, reward] : entry_reward) {
    if (cell == c) return reward;
  }
  return 0.0;
}

int GridSpec::n_states() const { return rows * cols - static_cast<int>(blocked.size()); }

std::optional<int> GridSpec::state_of(Cell c) const {
  if (c.row < 0 || c.row >= rows || c.col < 0 || c.col >= cols || is_blocked(c)) {
    return std::nullopt;
  }
  int index = 0;
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < cols; ++k) {
      const Cell cell{r, k};
      if (cell == c) return index;
      if (!is_blocked(cell)) ++index;
    }
  }
  return std::nullopt;
}

Cell GridSpec::cell_of(int state) const {
  int index = 0;
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < cols; ++k) {
      const Cell cell{r, k};
      if (is_blocked(cell)) continue;
      if (index == state) return cell;
      ++index;
    }
  }
  throw DomainError("gridworld: state index out of range");
}

Mdp build_gridworld(const GridSpec& spec) {
  const int n_s = spec.n_states();
  const int n_a = 4;
  const auto start = spec.state_of(spec.start);
  if (!start) throw DomainError("gridworld: start cell is not a state");

  // Walls and blocked cells bounce back to the current cell.
  auto move = [&](Cell from, int action) {
    const Cell to{from.row + kMoves[action].first, from.col + kMoves[action].second};
    return spec.state_of(to).value_or(*spec.state_of(from));
  };

  Matrix transition = Matrix::Zero(n_s * n_a, n_s);
  for (int s = 0; s < n_s; ++s) {
    const Cell cell = spec.cell_of(s);
    for (int a = 0; a < n_a; ++a) {
      auto row = transition.row(s * n_a + a);
      if (spec.is_terminal(cell)) {
        row(*start) = 1.0;
        continue;
      }
      row(move(cell, a)) += spec.intended;
      row(move(cell, kPerpendicular[a].first)) += spec.perpendicular;
      row(move(cell, kPerpendicular[a].second)) += spec.perpendicular;
    }
  }

  Vector entry(n_s);
  for (int s = 0; s < n_s; ++s) entry(s) = spec.entry_reward_of(spec.cell_of(s));
  const Vector expected_entry = transition * entry;
  Matrix reward = Eigen::Map<const Matrix>(expected_entry.data(), n_s, n_a);

  Vector p0 = Vector::Zero(n_s);
  p0(*start) = 1.0;

  std::vector<std::string> state_labels;
  for (int s = 0; s < n_s; ++s) {
    const Cell c = spec.cell_of(s);
    state_labels.push_back("(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")");
  }
  return Mdp(std::move(transition), std::move(reward), spec.gamma, std::move(p0),
             std::move(state_labels), {kActionNames.begin(), kActionNames.end()});
}

Mdp build_gridworld(GridVariant variant) { return build_gridworld(GridSpec::for_variant(variant)); }

std::string render_policy(const Policy& policy, const GridSpec& spec) {
  if (policy.n_states() != spec.n_states() || policy.n_actions() != 4) {
    throw DomainError("render_policy: policy does not match the grid");
  }
  const std::vector<int> greedy = policy.greedy_actions();
  std::string out;
  for (int r = 0; r < spec.rows; ++r) {
    for (int k = 0; k < spec.cols; ++k) {
      const Cell c{r, k};
      if (spec.is_blocked(c)) {
        out += '#';
      } else if (spec.is_terminal(c)) {
        out += spec.entry_reward_of(c) >= 0.0 ? '+' : '-';
      } else {
        out += kArrows[static_cast<std::size_t>(greedy[static_cast<std::size_t>(*spec.state_of(c))])];
      }
    }
    if (r + 1 < spec.rows) out += '\n';
  }
  return out;
}

}  // namespace dcpo
