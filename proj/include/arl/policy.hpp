#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "arl/mlp.hpp"
#include "arl/reward_model.hpp"
#include "arl/trajectory.hpp"

namespace arl {

/// Q-values for the four actions from (x, y): 2 -> 64 -> 64 -> 4, ReLU hidden units.
class QNetwork {
 public:
  static constexpr int kHidden = 64;

  QNetwork() : QNetwork(0) {}
  explicit QNetwork(std::uint64_t seed);
  explicit QNetwork(Mlp net);

  std::array<double, 4> q_values(const State& s) const;
  const Mlp& network() const { return net_; }
  Mlp& network() { return net_; }

  nlohmann::json to_json() const { return net_.to_json(); }
  static QNetwork from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static QNetwork load(const std::filesystem::path& path);

  friend bool operator==(const QNetwork&, const QNetwork&) = default;

 private:
  Mlp net_;
};

/// argmax of the Q-values; ties resolve in Up, Right, Down, Left order.
Action greedy_action(const QNetwork& q, const State& s);

struct Transition {
  State s;
  Action a = Action::Up;
  double r = 0.0;
  State s_next;
};

/// Fixed-capacity ring buffer with uniform sampling over stored transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// Reward signal for Q-learning: the true reward or a learned model.
using RewardSource = StepReward;
RewardSource true_reward_source(const MazeEnv& env);
RewardSource model_reward_source(const RewardModel& model);

struct DqnConfig {
  long step_budget = 150'000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_decay_steps = 75'000;
  double gamma = 0.99;
  long target_sync_interval = 500;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int episode_length = 200;
  std::size_t replay_capacity = 10'000;
  long warmup_steps = 1'000;
  int train_every = 1;
  /// Training episodes start at the maze's fixed start instead of a sampled state.
  bool fixed_start = false;
  std::uint64_t seed = 0;
  /// Optional wall-clock cap in seconds; zero disables it.
  double wall_clock_seconds = 0.0;
};

double epsilon_at(const DqnConfig& cfg, long step);

struct DqnCheckpoint {
  long step = 0;
  QNetwork network;
};

struct DqnResult {
  QNetwork network;
  std::vector<DqnCheckpoint> checkpoints;  // in requested order
  long steps_run = 0;
  double last_loss = 0.0;
};

/// Episodic epsilon-greedy DQN with replay and a periodically synced target network.
/// `checkpoint_steps` snapshots the online network after that many environment steps.
/// Warm-starts from `init` when given. Throws DivergenceError on a non-finite loss.
DqnResult train_dqn(const MazeEnv& env, const RewardSource& reward, const DqnConfig& cfg,
                    const std::vector<long>& checkpoint_steps = {},
                    const std::optional<QNetwork>& init = std::nullopt);

/// One gradient step of Huber-loss Q regression on `batch`; returns the mean loss.
double dqn_update(QNetwork& online, const QNetwork& target, Adam& adam,
                  const std::vector<Transition>& batch, double gamma);

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double mean_path_length = 0.0;
  std::vector<double> final_distances;
};

/// Rolls `policy` out from the maze's start once per seed (epsilon-greedy with the
/// seed's rng when epsilon > 0) and reports the normalised final goal distance.
EvalResult evaluate_rollouts(const MazeEnv& env, const Policy& policy, int episode_length, int n_seeds,
                             double epsilon = 0.0, std::uint64_t seed = 0);

/// Greedy evaluation of a Q-network.
EvalResult evaluate_policy(const MazeEnv& env, const QNetwork& q, int episode_length, int n_seeds,
                           double epsilon = 0.0, std::uint64_t seed = 0);

/// Mean and population standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

}  // namespace arl
