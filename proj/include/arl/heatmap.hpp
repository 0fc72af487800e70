#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "arl/env.hpp"
#include "arl/reward_model.hpp"

namespace arl {

/// Reward maps over a resolution x resolution grid of cell centres. Cell (i, j)
/// is column i (x) and row j (y); vectors are indexed j * resolution + i.
struct Heatmap {
  int resolution = 0;
  std::vector<double> raw;     // max_a r(s, a)
  std::vector<double> value;   // raw, min-max normalised over the grid; all 0.5 when constant
  std::vector<int> best_action;  // argmax_a r(s, a) as an action index
  std::vector<std::uint8_t> wall;

  State cell_centre(int i, int j) const;
};

using StateActionReward = std::function<double(const State&, Action)>;

/// Generic reward function, evaluated cell by cell.
Heatmap compute_heatmap(const MazeEnv& env, const StateActionReward& reward, int resolution);

/// The model evaluated on the whole grid in one batched pass (parallel kernel).
Heatmap compute_heatmap(const MazeEnv& env, const RewardModel& model, int resolution);

namespace serial {
/// Reference for the batched model heatmap.
Heatmap compute_heatmap(const MazeEnv& env, const RewardModel& model, int resolution);
}

/// True reward r(s, a, T(s, a)) as a state-action reward.
StateActionReward true_reward_adapter(const MazeEnv& env);

/// Min-max normalisation; a constant input maps to all 0.5.
std::vector<double> normalise(const std::vector<double>& values);

/// Writes value.csv, best_action.csv, value.ppm and best_action.ppm into `dir`.
/// CSV rows are "x,y,<value>,wall", one per cell.
void write_heatmap(const Heatmap& h, const std::filesystem::path& dir);

}  // namespace arl
