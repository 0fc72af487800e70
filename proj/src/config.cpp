#include "arl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "arl/error.hpp"

namespace arl {

std::string_view mode_name(PreferenceMode m) {
  switch (m) {
    case PreferenceMode::Synthetic:
      return "synthetic";
    case PreferenceMode::Human:
      return "human";
    case PreferenceMode::HumanLive:
      return "human-live";
  }
  return "?";
}

PreferenceMode mode_from_name(std::string_view name) {
  if (name == "synthetic") return PreferenceMode::Synthetic;
  if (name == "human") return PreferenceMode::Human;
  if (name == "human-live") return PreferenceMode::HumanLive;
  throw Error("unknown preference mode '" + std::string(name) + "'");
}

std::string_view ordering_name(ExtensionOrdering o) {
  switch (o) {
    case ExtensionOrdering::Auto:
      return "auto";
    case ExtensionOrdering::ReturnSum:
      return "return_sum";
    case ExtensionOrdering::LabelCount:
      return "label_count";
    case ExtensionOrdering::Live:
      return "live";
  }
  return "?";
}

ExtensionOrdering ordering_from_name(std::string_view name) {
  if (name == "auto") return ExtensionOrdering::Auto;
  if (name == "return_sum") return ExtensionOrdering::ReturnSum;
  if (name == "label_count") return ExtensionOrdering::LabelCount;
  if (name == "live") return ExtensionOrdering::Live;
  throw Error("unknown extension ordering '" + std::string(name) + "'");
}

ExtensionOrdering RunConfig::effective_ordering() const {
  if (extension_order != ExtensionOrdering::Auto) return extension_order;
  switch (mode) {
    case PreferenceMode::Synthetic:
      return ExtensionOrdering::ReturnSum;
    case PreferenceMode::Human:
      return ExtensionOrdering::LabelCount;
    case PreferenceMode::HumanLive:
      return ExtensionOrdering::Live;
  }
  return ExtensionOrdering::ReturnSum;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid config: ") + what);
  };
  require(wall_count >= 0, "wall_count must be >= 0");
  require(n_trajectories >= 2, "n_trajectories must be >= 2");
  require(trajectory_length >= 1, "trajectory_length must be >= 1");
  require(delta > 0.0, "delta must be > 0");
  require(label_budget >= 0, "label_budget must be >= 0");
  require(extension_cap >= 1, "extension_cap must be >= 1");
  require(reward.learning_rate > 0.0 && reward.epochs >= 0 && reward.batch_size > 0,
          "reward_model settings must be positive");
  require(reward.test_fraction > 0.0 && reward.test_fraction < 1.0, "reward_model.test_fraction must lie in (0,1)");
  require(dqn.gamma >= 0.0 && dqn.gamma <= 1.0, "dqn.gamma must lie in [0,1]");
  require(dqn.step_budget >= 0 && dqn.batch_size > 0 && dqn.episode_length > 0 && dqn.target_sync_interval > 0 &&
              dqn.replay_capacity > 0 && dqn.train_every > 0,
          "dqn budgets must be positive");
  require(dqn.learning_rate > 0.0, "dqn.learning_rate must be > 0");
  require(policy_seeds >= 1, "policy_seeds must be >= 1");
  for (long c : checkpoints) require(c >= 0 && c <= dqn.step_budget, "checkpoints must lie within dqn.step_budget");
  require(eval_episode_length >= 1 && eval_seeds >= 1, "evaluation settings must be positive");
  require(heatmap_resolution >= 2, "heatmap_resolution must be >= 2");
  require(iteration.iterations >= 1 && iteration.length_start >= 1 && iteration.length_increment >= 0,
          "iteration schedule must be positive");
  require(iteration.queries_per_iteration >= 0, "iteration.queries_per_iteration must be >= 0");
  require(iteration.rollout_epsilon >= 0.0 && iteration.rollout_epsilon <= 1.0,
          "iteration.rollout_epsilon must lie in [0,1]");
  require(service.port >= 0 && service.port < 65536, "service.port out of range");
}

RunConfig default_run_config() { return RunConfig{}; }

namespace {

class Fields {
 public:
  Fields(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error("config section '" + where_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (j_.contains(key)) {
      try {
        out = j_.at(key).get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw Error("config key '" + where_ + key + "': " + e.what());
      }
    }
  }

  const nlohmann::json* section(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw Error("unknown config key '" + where_ + item.key() + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json env{{"wall_count", c.wall_count}};
  env["seed"] = c.env_seed ? nlohmann::json(*c.env_seed) : nlohmann::json(nullptr);
  return {
      {"seed", c.seed},
      {"env", env},
      {"n_trajectories", c.n_trajectories},
      {"trajectory_length", c.trajectory_length},
      {"delta", c.delta},
      {"preference_mode", std::string(mode_name(c.mode))},
      {"label_budget", c.label_budget},
      {"auto_label", c.auto_label},
      {"generalise", c.generalise},
      {"extension_order", std::string(ordering_name(c.extension_order))},
      {"include_raw_labels", c.include_raw_labels},
      {"extension_cap", c.extension_cap},
      {"reward_model",
       {{"learning_rate", c.reward.learning_rate},
        {"epochs", c.reward.epochs},
        {"batch_size", c.reward.batch_size},
        {"test_fraction", c.reward.test_fraction}}},
      {"dqn",
       {{"step_budget", c.dqn.step_budget},
        {"epsilon_start", c.dqn.epsilon_start},
        {"epsilon_end", c.dqn.epsilon_end},
        {"epsilon_decay_steps", c.dqn.epsilon_decay_steps},
        {"gamma", c.dqn.gamma},
        {"target_sync_interval", c.dqn.target_sync_interval},
        {"learning_rate", c.dqn.learning_rate},
        {"batch_size", c.dqn.batch_size},
        {"episode_length", c.dqn.episode_length},
        {"replay_capacity", c.dqn.replay_capacity},
        {"warmup_steps", c.dqn.warmup_steps},
        {"train_every", c.dqn.train_every},
        {"fixed_start", c.dqn.fixed_start},
        {"wall_clock_seconds", c.dqn.wall_clock_seconds}}},
      {"policy_seeds", c.policy_seeds},
      {"checkpoints", c.checkpoints},
      {"eval", {{"episode_length", c.eval_episode_length}, {"n_seeds", c.eval_seeds}}},
      {"heatmap_resolution", c.heatmap_resolution},
      {"iterative", c.iterative},
      {"iteration",
       {{"iterations", c.iteration.iterations},
        {"length_start", c.iteration.length_start},
        {"length_increment", c.iteration.length_increment},
        {"queries_per_iteration", c.iteration.queries_per_iteration},
        {"rollout_epsilon", c.iteration.rollout_epsilon},
        {"reward_epochs", c.iteration.reward_epochs},
        {"dqn_steps_per_iteration", c.iteration.dqn_steps_per_iteration},
        {"wall_clock_seconds", c.iteration.wall_clock_seconds}}},
      {"service",
       {{"port", c.service.port}, {"timeout_seconds", c.service.timeout_seconds}, {"ui_dir", c.service.ui_dir}}},
  };
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  Fields top(j, "");
  top.get("seed", c.seed);
  if (const auto* env = top.section("env")) {
    Fields f(*env, "env.");
    f.get("wall_count", c.wall_count);
    if (const auto* s = f.section("seed"); s && !s->is_null()) c.env_seed = s->get<std::uint64_t>();
    f.finish();
  }
  top.get("n_trajectories", c.n_trajectories);
  top.get("trajectory_length", c.trajectory_length);
  top.get("delta", c.delta);
  std::string mode(mode_name(c.mode));
  top.get("preference_mode", mode);
  c.mode = mode_from_name(mode);
  top.get("label_budget", c.label_budget);
  top.get("auto_label", c.auto_label);
  top.get("generalise", c.generalise);
  std::string ordering(ordering_name(c.extension_order));
  top.get("extension_order", ordering);
  c.extension_order = ordering_from_name(ordering);
  top.get("include_raw_labels", c.include_raw_labels);
  top.get("extension_cap", c.extension_cap);
  if (const auto* rm = top.section("reward_model")) {
    Fields f(*rm, "reward_model.");
    f.get("learning_rate", c.reward.learning_rate);
    f.get("epochs", c.reward.epochs);
    f.get("batch_size", c.reward.batch_size);
    f.get("test_fraction", c.reward.test_fraction);
    f.finish();
  }
  if (const auto* d = top.section("dqn")) {
    Fields f(*d, "dqn.");
    f.get("step_budget", c.dqn.step_budget);
    f.get("epsilon_start", c.dqn.epsilon_start);
    f.get("epsilon_end", c.dqn.epsilon_end);
    f.get("epsilon_decay_steps", c.dqn.epsilon_decay_steps);
    f.get("gamma", c.dqn.gamma);
    f.get("target_sync_interval", c.dqn.target_sync_interval);
    f.get("learning_rate", c.dqn.learning_rate);
    f.get("batch_size", c.dqn.batch_size);
    f.get("episode_length", c.dqn.episode_length);
    f.get("replay_capacity", c.dqn.replay_capacity);
    f.get("warmup_steps", c.dqn.warmup_steps);
    f.get("train_every", c.dqn.train_every);
    f.get("fixed_start", c.dqn.fixed_start);
    f.get("wall_clock_seconds", c.dqn.wall_clock_seconds);
    f.finish();
  }
  top.get("policy_seeds", c.policy_seeds);
  top.get("checkpoints", c.checkpoints);
  if (const auto* e = top.section("eval")) {
    Fields f(*e, "eval.");
    f.get("episode_length", c.eval_episode_length);
    f.get("n_seeds", c.eval_seeds);
    f.finish();
  }
  top.get("heatmap_resolution", c.heatmap_resolution);
  top.get("iterative", c.iterative);
  if (const auto* it = top.section("iteration")) {
    Fields f(*it, "iteration.");
    f.get("iterations", c.iteration.iterations);
    f.get("length_start", c.iteration.length_start);
    f.get("length_increment", c.iteration.length_increment);
    f.get("queries_per_iteration", c.iteration.queries_per_iteration);
    f.get("rollout_epsilon", c.iteration.rollout_epsilon);
    f.get("reward_epochs", c.iteration.reward_epochs);
    f.get("dqn_steps_per_iteration", c.iteration.dqn_steps_per_iteration);
    f.get("wall_clock_seconds", c.iteration.wall_clock_seconds);
    f.finish();
  }
  if (const auto* s = top.section("service")) {
    Fields f(*s, "service.");
    f.get("port", c.service.port);
    f.get("timeout_seconds", c.service.timeout_seconds);
    f.get("ui_dir", c.service.ui_dir);
    f.finish();
  }
  top.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace arl
