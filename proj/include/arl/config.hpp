#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arl/policy.hpp"
#include "arl/reward_model.hpp"

namespace arl {

enum class PreferenceMode { Synthetic, Human, HumanLive };
/// How preferred extensions are ordered before lifting. Auto picks ReturnSum for
/// synthetic mode, LabelCount for human mode and Live for human-live mode.
enum class ExtensionOrdering { Auto, ReturnSum, LabelCount, Live };

std::string_view mode_name(PreferenceMode m);
PreferenceMode mode_from_name(std::string_view name);
std::string_view ordering_name(ExtensionOrdering o);
ExtensionOrdering ordering_from_name(std::string_view name);

struct IterationSettings {
  int iterations = 3;
  int length_start = 20;
  int length_increment = 10;
  int queries_per_iteration = 10;
  /// Exploration used when rolling out the current policy for new trajectories.
  double rollout_epsilon = 0.3;
  int reward_epochs = 20;
  long dqn_steps_per_iteration = 50'000;
  /// Stop starting new iterations after this many seconds; zero disables the limit.
  double wall_clock_seconds = 0.0;

  /// Trajectory length used at iteration k (0-based).
  int length_at(int k) const { return length_start + k * length_increment; }
};

struct ServiceSettings {
  int port = 8321;  // 0 picks a free port
  double timeout_seconds = 3600.0;
  /// Directory with the browser UI's static files; served at / when set.
  std::string ui_dir;
};

/// Stage seeds (trajectories, queries, split, model init, each policy) all derive
/// from `seed`; the seed fields inside `reward` and `dqn` are overwritten per stage.
struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> env_seed;  // defaults to `seed`
  int wall_count = 6;
  int n_trajectories = 100;
  int trajectory_length = 20;
  double delta = 0.2;
  PreferenceMode mode = PreferenceMode::Synthetic;
  /// Step-3 labels to collect; 0 labels every attacking pair.
  int label_budget = 0;
  /// In human modes, answer queries with the synthetic oracle instead of waiting for a person.
  bool auto_label = false;
  bool generalise = true;
  ExtensionOrdering extension_order = ExtensionOrdering::Auto;
  /// Add the raw Step-3 labels to the generalised training set.
  bool include_raw_labels = false;
  std::size_t extension_cap = 10'000;
  TrainConfig reward;
  DqnConfig dqn;
  int policy_seeds = 3;
  std::vector<long> checkpoints{50'000, 100'000, 150'000};
  int eval_episode_length = 200;
  int eval_seeds = 1;
  int heatmap_resolution = 100;
  bool iterative = false;
  IterationSettings iteration;
  ServiceSettings service;

  std::uint64_t effective_env_seed() const { return env_seed.value_or(seed); }
  ExtensionOrdering effective_ordering() const;
  /// Throws arl::Error describing the first invalid field.
  void validate() const;
};

RunConfig default_run_config();

/// Every RunConfig field; unknown keys are rejected with arl::Error.
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON form, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Independent seed for a numbered stream (splitmix64 of master and stream).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace arl
