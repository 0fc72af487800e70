#include "arl/policy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include "arl/error.hpp"
#include "arl/kernels/mlp_gradient.hpp"

namespace arl {

QNetwork::QNetwork(std::uint64_t seed) : net_(MlpArchitecture{{2, kHidden, kHidden, 4}, Activation::Relu}, seed) {}

QNetwork::QNetwork(Mlp net) : net_(std::move(net)) {
  if (net_.input_width() != 2 || net_.output_width() != 4)
    throw Error("Q-network must map 2 inputs to 4 outputs");
}

std::array<double, 4> QNetwork::q_values(const State& s) const {
  Eigen::MatrixXd in(2, 1);
  in << s.x, s.y;
  const Eigen::MatrixXd out = net_.forward(in);
  return {out(0, 0), out(1, 0), out(2, 0), out(3, 0)};
}

QNetwork QNetwork::from_json(const nlohmann::json& j) { return QNetwork(Mlp::from_json(j)); }

void QNetwork::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

QNetwork QNetwork::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return from_json(nlohmann::json::parse(in));
}

Action greedy_action(const QNetwork& q, const State& s) {
  const auto values = q.q_values(s);
  int best = 0;
  for (int k = 1; k < 4; ++k)
    if (values[k] > values[best]) best = k;
  return kActions[best];
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("replay capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  if (items_.size() < capacity_) {
    items_.push_back(t);
  } else {
    items_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw Error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(items_[pick(rng)]);
  return out;
}

RewardSource true_reward_source(const MazeEnv& env) {
  return [&env](const State& s, Action a, const State& n) { return env.true_reward(s, a, n); };
}

RewardSource model_reward_source(const RewardModel& model) {
  return [&model](const State& s, Action a, const State&) { return model.predict(s, a); };
}

double epsilon_at(const DqnConfig& cfg, long step) {
  if (cfg.epsilon_decay_steps <= 0 || step >= cfg.epsilon_decay_steps) return cfg.epsilon_end;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.epsilon_decay_steps);
  return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

double dqn_update(QNetwork& online, const QNetwork& target, Adam& adam,
                  const std::vector<Transition>& batch, double gamma) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd states(2, n);
  Eigen::MatrixXd next(2, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    states.col(k) << batch[k].s.x, batch[k].s.y;
    next.col(k) << batch[k].s_next.x, batch[k].s_next.y;
  }
  const Eigen::MatrixXd next_q = target.network().forward(next);
  double loss = 0.0;
  const auto grad = kernels::serial::forward_backward(online.network(), states, [&](const Eigen::MatrixXd& q) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const int a = action_index(batch[k].a);
      const double y = batch[k].r + gamma * next_q.col(k).maxCoeff();
      const double err = q(a, k) - y;
      // Huber loss with unit threshold, averaged over the batch.
      loss += std::abs(err) <= 1.0 ? 0.5 * err * err : std::abs(err) - 0.5;
      g(a, k) = std::clamp(err, -1.0, 1.0) / static_cast<double>(n);
    }
    return g;
  });
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw DivergenceError("Q-learning loss became non-finite");
  adam.step(online.network().parameters(), grad);
  return loss;
}

DqnResult train_dqn(const MazeEnv& env, const RewardSource& reward, const DqnConfig& cfg,
                    const std::vector<long>& checkpoint_steps, const std::optional<QNetwork>& init) {
  if (cfg.step_budget < 0 || cfg.batch_size <= 0 || cfg.episode_length <= 0 || cfg.train_every <= 0 ||
      cfg.target_sync_interval <= 0)
    throw Error("invalid DQN configuration");
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw Error("gamma must lie in [0, 1]");

  DqnResult result{init ? *init : QNetwork(cfg.seed), {}, 0, 0.0};
  QNetwork& online = result.network;
  QNetwork target = online;
  Adam adam(online.network().parameter_count(), cfg.learning_rate);
  ReplayBuffer buffer(cfg.replay_capacity);
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_action(0, 3);

  std::vector<std::pair<long, std::size_t>> pending;  // (step, output slot)
  for (std::size_t k = 0; k < checkpoint_steps.size(); ++k) pending.emplace_back(checkpoint_steps[k], k);
  std::sort(pending.begin(), pending.end());
  std::vector<std::optional<DqnCheckpoint>> snapshots(checkpoint_steps.size());
  auto take_snapshots = [&](long step) {
    while (!pending.empty() && pending.front().first <= step) {
      snapshots[pending.front().second] = DqnCheckpoint{pending.front().first, online};
      pending.erase(pending.begin());
    }
  };

  const auto started = std::chrono::steady_clock::now();
  auto reset = [&] { return cfg.fixed_start ? env.start() : env.sample_initial_state(rng); };
  State s = reset();
  int episode_step = 0;
  long step = 0;
  take_snapshots(0);
  for (; step < cfg.step_budget; ++step) {
    if (cfg.wall_clock_seconds > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >= cfg.wall_clock_seconds)
      break;
    const Action a = unit(rng) < epsilon_at(cfg, step) ? kActions[any_action(rng)] : greedy_action(online, s);
    const State next = env.transition(s, a);
    buffer.push({s, a, reward(s, a, next), next});
    s = next;
    if (++episode_step >= cfg.episode_length) {
      s = reset();
      episode_step = 0;
    }
    if (step + 1 >= cfg.warmup_steps && buffer.size() >= static_cast<std::size_t>(cfg.batch_size) &&
        (step + 1) % cfg.train_every == 0)
      result.last_loss = dqn_update(online, target, adam, buffer.sample(cfg.batch_size, rng), cfg.gamma);
    if ((step + 1) % cfg.target_sync_interval == 0) target = online;
    take_snapshots(step + 1);
  }
  result.steps_run = step;
  // Checkpoints beyond the steps actually run (wall-clock stop) get the final network.
  for (auto& snap : snapshots)
    if (!snap) snap = DqnCheckpoint{step, online};
  for (auto& snap : snapshots) result.checkpoints.push_back(std::move(*snap));
  return result;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  // Identical values have exactly zero spread; the mean of n copies can be off by an ulp.
  if (std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end())
    return {values.front(), 0.0};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

EvalResult evaluate_rollouts(const MazeEnv& env, const Policy& policy, int episode_length, int n_seeds,
                             double epsilon, std::uint64_t seed) {
  if (n_seeds < 1) throw Error("evaluation needs at least one seed");
  if (episode_length < 1) throw Error("episode length must be positive");
  EvalResult result;
  double path_total = 0.0;
  for (int k = 0; k < n_seeds; ++k) {
    Rng rng(seed + static_cast<std::uint64_t>(k));
    const Trajectory t = policy_rollout(env, policy, episode_length, env.start(), epsilon, rng);
    double path = 0.0;
    for (std::size_t i = 0; i < t.length(); ++i) path += distance(t.steps[i].state, successor(env, t, i));
    path_total += path;
    result.final_distances.push_back(env.normalised_goal_distance(successor(env, t, t.length() - 1)));
  }
  std::tie(result.mean, result.std) = mean_std(result.final_distances);
  result.mean_path_length = path_total / n_seeds;
  return result;
}

EvalResult evaluate_policy(const MazeEnv& env, const QNetwork& q, int episode_length, int n_seeds,
                           double epsilon, std::uint64_t seed) {
  return evaluate_rollouts(env, [&q](const State& s) { return greedy_action(q, s); }, episode_length, n_seeds,
                           epsilon, seed);
}

}  // namespace arl
