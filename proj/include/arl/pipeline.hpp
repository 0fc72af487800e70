#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arl/argumentation.hpp"
#include "arl/config.hpp"
#include "arl/policy.hpp"
#include "arl/preference.hpp"
#include "arl/reward_model.hpp"

namespace arl {

/// Seed streams passed to derive_seed together with RunConfig::seed.
namespace streams {
inline constexpr std::uint64_t kTrajectories = 1;
inline constexpr std::uint64_t kQueries = 2;
inline constexpr std::uint64_t kLiveSort = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kRewardInit = 5;
inline constexpr std::uint64_t kRewardShuffle = 6;
inline constexpr std::uint64_t kEvaluation = 7;
inline constexpr std::uint64_t kPolicy = 100;     // + policy seed index
inline constexpr std::uint64_t kIteration = 1000;  // + 16 * iteration index
}  // namespace streams

/// Output directory of one run. Every artifact written through it is listed in
/// manifest.json together with the hash of the config that produced it.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path root, std::string config_hash);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  const std::string& config_hash() const { return hash_; }

  void write_json(const std::string& name, const nlohmann::json& j);
  /// Adds a file written by other code to the manifest.
  void record(const std::string& name);
  /// error.json: {"stage", "error"}.
  void write_error(const std::string& stage, const std::string& what);

 private:
  void flush_manifest() const;

  std::filesystem::path root_;
  std::string hash_;
  std::vector<std::string> artifacts_;
};

MazeEnv make_env(const RunConfig& cfg);
TrajectoryStore collect_trajectories(const RunConfig& cfg, const MazeEnv& env);

/// label_budget attacking pairs sampled uniformly, or every attack when the budget is 0.
std::vector<IdPair> select_queries(const RunConfig& cfg, const Aaf& aaf);
std::vector<PreferenceRecord> label_synthetic(const MazeEnv& env, const TrajectoryStore& store,
                                              const std::vector<IdPair>& pairs);

struct GeneralisationResult {
  ExtensionOrder order;
  std::vector<PreferenceRecord> dataset;
  /// Answers gathered by a live ordering.
  std::vector<PreferenceRecord> live_labels;
  long comparisons = 0;
  long ties = 0;
  bool sort_valid = true;
};

/// Orders the extensions, lifts the order and assembles the generalised dataset.
/// `live` answers the queries of a live ordering and is unused otherwise.
GeneralisationResult generalise(const RunConfig& cfg, const MazeEnv& env, const TrajectoryStore& store,
                                const Aaf& aaf, const std::vector<PreferredExtension>& extensions,
                                const std::vector<PreferenceRecord>& labels, const PairLabeler& live = {});

PairDataset make_pair_dataset(const TrajectoryStore& store, const std::vector<PreferenceRecord>& records);

struct RewardStageResult {
  RewardModel model;
  TrainReport report;
  double mppa_train = 0.0;
  double mppa_test = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Random split, fresh model, training, MPPA on both sides of the split.
RewardStageResult train_reward_stage(const RunConfig& cfg, const TrajectoryStore& store,
                                     const std::vector<PreferenceRecord>& dataset);

struct CheckpointMetrics {
  long step = 0;
  double distance_mean = 0.0;
  double distance_std = 0.0;
  double mean_path_length = 0.0;

  nlohmann::json to_json() const;
};

/// Evaluation pooled over several networks (one per policy seed).
CheckpointMetrics evaluate_networks(const RunConfig& cfg, const MazeEnv& env, const std::vector<QNetwork>& nets,
                                    long step);

struct PolicyStageResult {
  std::vector<DqnResult> runs;  // one per policy seed
  std::vector<CheckpointMetrics> checkpoints;
  CheckpointMetrics final;
};

PolicyStageResult train_policy_stage(const RunConfig& cfg, const MazeEnv& env, const RewardSource& reward,
                                     const std::vector<QNetwork>& init = {});

/// Steps 1-5 in memory, synthetic labels only.
struct RewardStages {
  MazeEnv env;
  TrajectoryStore store;
  Aaf aaf;
  std::vector<PreferredExtension> extensions;
  std::vector<PreferenceRecord> labels;
  GeneralisationResult generalisation;
  std::vector<PreferenceRecord> dataset;
  RewardStageResult reward;
};
RewardStages run_reward_stages(const RunConfig& cfg);

/// Steps 1-6 once, writing every artifact under `out`. Returns metrics.json's content.
/// A failing stage writes error.json and throws StageError.
nlohmann::json run_pipeline(const RunConfig& cfg, const std::filesystem::path& out);

/// The iterative protocol; per-iteration artifacts go to out/iteration_<k>/.
nlohmann::json run_iterative(const RunConfig& cfg, const std::filesystem::path& out);

/// Markdown table over the metrics.json of each run directory.
std::string report_table(const std::vector<std::filesystem::path>& runs);

void write_records_jsonl(const std::filesystem::path& path, const std::vector<PreferenceRecord>& records);
std::vector<PreferenceRecord> read_records_jsonl(const std::filesystem::path& path);
/// Synthetic labels in label-log form: left/right is the queried pair, choice names the winner.
void write_synthetic_log(const std::filesystem::path& path, const std::vector<IdPair>& pairs,
                         const std::vector<PreferenceRecord>& records);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace arl
