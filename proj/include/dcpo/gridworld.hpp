#pragma once

#include "dcpo/mdp.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dcpo {

/// Grid cell as (row, column); row 0 is the top of the grid.
struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class GridVariant { standard, risk_averse };

/// Action indices, in the order the MDP exposes them.
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

/// Layout of the 3x4 slippery gridworld. Blocked cells are not states;
/// terminal cells send every action back to the start cell.
struct GridSpec {
  int rows = 3;
  int cols = 4;
  std::vector<Cell> blocked{{1, 1}};
  std::vector<Cell> terminal{{0, 3}, {1, 3}};
  Cell start{2, 0};
  double intended = 0.8;
  double perpendicular = 0.1;
  double gamma = 0.95;
  /// Reward collected on entering a cell; cells not listed give 0.
  std::vector<std::pair<Cell, double>> entry_reward{{{0, 3}, 1.0}, {{1, 3}, -1.0}};

  static GridSpec for_variant(GridVariant variant);

  bool is_blocked(Cell c) const;
  bool is_terminal(Cell c) const;
  double entry_reward_of(Cell c) const;
  int n_states() const;
  /// Row-major state index skipping blocked cells; nullopt for a blocked or
  /// out-of-range cell.
  std::optional<int> state_of(Cell c) const;
  Cell cell_of(int state) const;
};

Mdp build_gridworld(const GridSpec& spec);
Mdp build_gridworld(GridVariant variant = GridVariant::standard);

/// Arrow per cell for the argmax action (lowest index on ties), '#' for a
/// blocked cell and '+' / '-' for terminal cells by the sign of their reward.
/// Rows are separated by '\n'.
std::string render_policy(const Policy& policy, const GridSpec& spec);

}  // namespace dcpo
