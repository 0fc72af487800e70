#include "arl/trajectory.hpp"

#include <fstream>

#include "arl/error.hpp"

namespace arl {

State successor(const MazeEnv& env, const Trajectory& t, std::size_t i) {
  if (i + 1 < t.steps.size()) return t.steps[i + 1].state;
  return env.transition(t.steps[i].state, t.steps[i].action);
}

bool is_consistent(const MazeEnv& env, const Trajectory& t) {
  if (t.steps.empty()) return false;
  State s = t.steps.front().state;
  if (env.blocked(s)) return false;
  for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) {
    s = env.transition(s, t.steps[i].action);
    if (!(s == t.steps[i + 1].state)) return false;
  }
  return true;
}

namespace {

Action uniform_action(Rng& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  return kActions[pick(rng)];
}

}  // namespace

Trajectory random_rollout(const MazeEnv& env, int length, Rng& rng, int id) {
  if (length < 1) throw Error("trajectory length must be at least 1");
  Trajectory t{id, {}};
  t.steps.reserve(length);
  State s = env.sample_initial_state(rng);
  for (int i = 0; i < length; ++i) {
    const Action a = uniform_action(rng);
    t.steps.push_back({s, a});
    s = env.transition(s, a);
  }
  return t;
}

Trajectory policy_rollout(const MazeEnv& env, const Policy& policy, int length, const State& start,
                          double epsilon, Rng& rng, int id) {
  if (length < 1) throw Error("trajectory length must be at least 1");
  if (epsilon < 0.0 || epsilon > 1.0) throw Error("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Trajectory t{id, {}};
  t.steps.reserve(length);
  State s = start;
  for (int i = 0; i < length; ++i) {
    const Action a = unit(rng) < epsilon ? uniform_action(rng) : policy(s);
    t.steps.push_back({s, a});
    s = env.transition(s, a);
  }
  return t;
}

double trajectory_return(const MazeEnv& env, const Trajectory& t, const StepReward& reward,
                         double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw Error("gamma must lie in [0, 1]");
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    total += discount * reward(t.steps[i].state, t.steps[i].action, successor(env, t, i));
    discount *= gamma;
  }
  return total;
}

double true_return(const MazeEnv& env, const Trajectory& t, double gamma) {
  return trajectory_return(
      env, t, [&env](const State& s, Action a, const State& n) { return env.true_reward(s, a, n); },
      gamma);
}

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& st : t.steps)
    steps.push_back({{st.state.x, st.state.y}, std::string(action_name(st.action))});
  return {{"id", t.id}, {"steps", std::move(steps)}};
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  t.id = j.at("id").get<int>();
  for (const auto& st : j.at("steps")) {
    const auto& xy = st.at(0);
    t.steps.push_back({{xy.at(0).get<double>(), xy.at(1).get<double>()},
                       action_from_name(st.at(1).get<std::string>())});
  }
  if (t.steps.empty()) throw Error("trajectory " + std::to_string(t.id) + " has no steps");
  return t;
}

int TrajectoryStore::add(Trajectory t) {
  t.id = static_cast<int>(trajectories_.size());
  trajectories_.push_back(std::move(t));
  return trajectories_.back().id;
}

const Trajectory& TrajectoryStore::at(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= trajectories_.size())
    throw Error("unknown trajectory id " + std::to_string(id));
  return trajectories_[id];
}

void TrajectoryStore::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : trajectories_) out << trajectory_to_json(t).dump() << '\n';
}

TrajectoryStore TrajectoryStore::read_jsonl(const std::filesystem::path& path, std::uint64_t env_seed,
                                            int iteration) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  TrajectoryStore store(env_seed, iteration);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Trajectory t = trajectory_from_json(nlohmann::json::parse(line));
    if (t.id != static_cast<int>(store.size()))
      throw Error("trajectory ids must be dense from 0 (got " + std::to_string(t.id) + ")");
    store.add(std::move(t));
  }
  return store;
}

TrajectoryStore generate_random_store(const MazeEnv& env, int count, int length, Rng& rng) {
  TrajectoryStore store(env.seed(), 0);
  for (int i = 0; i < count; ++i) store.add(random_rollout(env, length, rng));
  return store;
}

}  // namespace arl
