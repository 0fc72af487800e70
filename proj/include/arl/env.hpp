#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace arl {

using Rng = std::mt19937_64;

struct State {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

double distance(const State& a, const State& b);

/// The four moves, in the fixed tie-break order used everywhere (Up, Right, Down, Left).
enum class Action : std::uint8_t { Up = 0, Right = 1, Down = 2, Left = 3 };

inline constexpr std::array<Action, 4> kActions{Action::Up, Action::Right, Action::Down,
                                                Action::Left};
inline constexpr double kStepSize = 0.02;

State displacement(Action a);
std::string_view action_name(Action a);
Action action_from_name(std::string_view name);
inline int action_index(Action a) { return static_cast<int>(a); }

/// Axis-aligned closed rectangle.
struct Wall {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(const State& s) const {
    return s.x >= x_min && s.x <= x_max && s.y >= y_min && s.y <= y_max;
  }
  bool strictly_contains(const State& s) const {
    return s.x > x_min && s.x < x_max && s.y > y_min && s.y < y_max;
  }
  friend bool operator==(const Wall&, const Wall&) = default;
};

inline constexpr double kGoalRadius = 0.3;  // in normalised distance units

/// Deterministic continuous maze. Immutable after construction.
class MazeEnv {
 public:
  MazeEnv(std::uint64_t seed, std::vector<Wall> walls, State goal, State start,
          double max_distance = kUnitDiagonal);

  static constexpr double kUnitDiagonal = 1.4142135623730951;

  std::uint64_t seed() const { return seed_; }
  const std::vector<Wall>& walls() const { return walls_; }
  const State& goal() const { return goal_; }
  /// Fixed start used for policy evaluation and iterative rollouts.
  const State& start() const { return start_; }
  double max_distance() const { return max_distance_; }

  bool blocked(const State& s) const;
  State transition(const State& s, Action a) const;
  double normalised_goal_distance(const State& s) const;
  double true_reward(const State& s, Action a, const State& next) const;
  State sample_initial_state(Rng& rng) const;

  nlohmann::json to_json() const;
  static MazeEnv from_json(const nlohmann::json& j);

 private:
  std::uint64_t seed_;
  std::vector<Wall> walls_;
  State goal_;
  State start_;
  double max_distance_;
};

inline constexpr State kDefaultGoal{0.95, 0.95};
inline constexpr State kDefaultStart{0.02, 0.02};

/// Random rectilinear maze. Rejection-samples wall layouts until the flood-fill
/// connectivity checks pass; throws arl::Error after a bounded number of attempts.
MazeEnv generate_maze(std::uint64_t seed, int wall_count, State goal = kDefaultGoal,
                      State start = kDefaultStart);

/// Grid resolution of the connectivity check (cells of side 0.02).
inline constexpr int kFloodGrid = 50;

/// Free-cell mask over the kFloodGrid x kFloodGrid grid; cell (i, j) is column i, row j
/// and is free when its centre is outside every wall.
std::vector<std::uint8_t> free_cell_mask(const MazeEnv& env);

/// Number of free cells 4-connected to the cell containing `from`.
int flood_fill_reachable(const MazeEnv& env, const State& from);

}  // namespace arl
