#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "arl/env.hpp"

namespace arl {

struct Step {
  State state;
  Action action = Action::Up;

  friend bool operator==(const Step&, const Step&) = default;
};

/// Fixed-length sequence of (state, action) pairs. Doubles as an argument in the AAF.
struct Trajectory {
  int id = 0;
  std::vector<Step> steps;

  std::size_t length() const { return steps.size(); }
  const State& start_state() const { return steps.front().state; }
  const State& state(std::size_t i) const { return steps[i].state; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Successor of step i: the next stored state, or the transition out of the last step.
State successor(const MazeEnv& env, const Trajectory& t, std::size_t i);

/// Re-simulates the actions from the start state and checks the stored states match exactly.
bool is_consistent(const MazeEnv& env, const Trajectory& t);

using Policy = std::function<Action(const State&)>;

Trajectory random_rollout(const MazeEnv& env, int length, Rng& rng, int id = 0);

/// Epsilon-greedy rollout of `policy` from `start`.
Trajectory policy_rollout(const MazeEnv& env, const Policy& policy, int length, const State& start,
                          double epsilon, Rng& rng, int id = 0);

/// Per-step reward r(s, a, s').
using StepReward = std::function<double(const State&, Action, const State&)>;

double trajectory_return(const MazeEnv& env, const Trajectory& t, const StepReward& reward,
                         double gamma = 1.0);

/// Return under the environment's true reward.
double true_return(const MazeEnv& env, const Trajectory& t, double gamma = 1.0);

nlohmann::json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

/// Trajectories with dense ids from 0, all from one environment.
class TrajectoryStore {
 public:
  TrajectoryStore() = default;
  TrajectoryStore(std::uint64_t env_seed, int iteration) : env_seed_(env_seed), iteration_(iteration) {}

  /// Appends `t`, assigning it the next id. Returns that id.
  int add(Trajectory t);

  std::size_t size() const { return trajectories_.size(); }
  bool empty() const { return trajectories_.empty(); }
  const Trajectory& at(int id) const;
  const std::vector<Trajectory>& all() const { return trajectories_; }
  std::uint64_t env_seed() const { return env_seed_; }
  int iteration() const { return iteration_; }

  /// One trajectory per line.
  void write_jsonl(const std::filesystem::path& path) const;
  static TrajectoryStore read_jsonl(const std::filesystem::path& path, std::uint64_t env_seed = 0,
                                    int iteration = 0);

 private:
  std::uint64_t env_seed_ = 0;
  int iteration_ = 0;
  std::vector<Trajectory> trajectories_;
};

TrajectoryStore generate_random_store(const MazeEnv& env, int count, int length, Rng& rng);

}  // namespace arl
