#include "arl/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <climits>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include "arl/elicitation.hpp"
#include "arl/error.hpp"
#include "arl/heatmap.hpp"

namespace arl {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RunDirectory::RunDirectory(std::filesystem::path root, std::string config_hash)
    : root_(std::move(root)), hash_(std::move(config_hash)) {
  std::filesystem::create_directories(root_);
}

void RunDirectory::write_json(const std::string& name, const nlohmann::json& j) {
  write_json_file(path(name), j);
  record(name);
}

void RunDirectory::record(const std::string& name) {
  if (std::find(artifacts_.begin(), artifacts_.end(), name) == artifacts_.end()) artifacts_.push_back(name);
  flush_manifest();
}

void RunDirectory::write_error(const std::string& stage, const std::string& what) {
  write_json("error.json", {{"stage", stage}, {"error", what}, {"config_hash", hash_}});
}

void RunDirectory::flush_manifest() const {
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& a : artifacts_) artifacts.push_back({{"path", a}, {"config_hash", hash_}});
  write_json_file(path("manifest.json"), {{"config_hash", hash_}, {"artifacts", artifacts}});
}

void write_records_jsonl(const std::filesystem::path& path, const std::vector<PreferenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<PreferenceRecord> read_records_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<PreferenceRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(record_from_json(nlohmann::json::parse(line)));
  return out;
}

void write_synthetic_log(const std::filesystem::path& path, const std::vector<IdPair>& pairs,
                         const std::vector<PreferenceRecord>& records) {
  if (pairs.size() != records.size()) throw Error("label count does not match query count");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const LabelLogEntry e{static_cast<int>(k), pairs[k].first, pairs[k].second,
                          records[k].winner == pairs[k].first ? Choice::Left : Choice::Right, LabelSource::Synthetic,
                          records[k].timestamp};
    out << e.to_json().dump() << '\n';
  }
}

MazeEnv make_env(const RunConfig& cfg) { return generate_maze(cfg.effective_env_seed(), cfg.wall_count); }

TrajectoryStore collect_trajectories(const RunConfig& cfg, const MazeEnv& env) {
  Rng rng(derive_seed(cfg.seed, streams::kTrajectories));
  return generate_random_store(env, cfg.n_trajectories, cfg.trajectory_length, rng);
}

std::vector<IdPair> select_queries(const RunConfig& cfg, const Aaf& aaf) {
  if (cfg.label_budget == 0) return aaf.attacks();
  Rng rng(derive_seed(cfg.seed, streams::kQueries));
  return sample_queries(aaf, cfg.label_budget, rng);
}

std::vector<PreferenceRecord> label_synthetic(const MazeEnv& env, const TrajectoryStore& store,
                                              const std::vector<IdPair>& pairs) {
  std::vector<PreferenceRecord> out;
  out.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto r = synthetic_pair_label(env, store.at(pairs[k].first), store.at(pairs[k].second));
    r.query_id = static_cast<int>(k);
    out.push_back(r);
  }
  return out;
}

GeneralisationResult generalise(const RunConfig& cfg, const MazeEnv& env, const TrajectoryStore& store,
                                const Aaf& aaf, const std::vector<PreferredExtension>& extensions,
                                const std::vector<PreferenceRecord>& labels, const PairLabeler& live) {
  GeneralisationResult result;
  std::vector<int> items(extensions.size());
  std::iota(items.begin(), items.end(), 0);

  const ExtensionOrdering ordering = cfg.effective_ordering();
  Rng rng(derive_seed(cfg.seed, streams::kLiveSort));
  std::vector<double> returns;
  Comparator::Fn fn;
  switch (ordering) {
    case ExtensionOrdering::Auto:
    case ExtensionOrdering::ReturnSum:
      for (const auto& t : store.all()) returns.push_back(true_return(env, t));
      fn = [&](int i, int j) { return return_sum_compare(returns, extensions[i], extensions[j]); };
      break;
    case ExtensionOrdering::LabelCount:
      fn = [&](int i, int j) { return count_extension_compare(labels, extensions[i], extensions[j]); };
      break;
    case ExtensionOrdering::Live:
      if (!live) throw Error("live extension ordering needs a labeler");
      fn = live_extension_compare(aaf, extensions, live, rng, result.live_labels);
      break;
  }
  QueryBudget budget(cfg.label_budget > 0 ? cfg.label_budget : INT_MAX);
  Comparator cmp(fn, ordering == ExtensionOrdering::Live ? &budget : nullptr);
  const SortResult sorted = binary_insertion_sort(items, cmp);
  result.order = sorted.order;
  result.comparisons = sorted.comparisons;
  result.ties = cmp.tie_count();
  result.sort_valid = sorted.valid;

  result.dataset = build_generalised_dataset(aaf, lift_preferences(extensions, result.order));
  if (cfg.include_raw_labels) {
    std::set<IdPair> covered;
    for (const auto& r : result.dataset) covered.insert(std::minmax(r.winner, r.loser));
    for (const auto* raw : std::array<const std::vector<PreferenceRecord>*, 2>{&labels, &result.live_labels})
      for (const auto& r : *raw)
        if (covered.insert(std::minmax(r.winner, r.loser)).second) result.dataset.push_back(r);
  }
  return result;
}

PairDataset make_pair_dataset(const TrajectoryStore& store, const std::vector<PreferenceRecord>& records) {
  PairDataset d;
  d.pool = store.all();
  d.pairs.reserve(records.size());
  for (const auto& r : records) d.pairs.push_back({r.winner, r.loser});
  d.validate();
  return d;
}

RewardStageResult train_reward_stage(const RunConfig& cfg, const TrajectoryStore& store,
                                     const std::vector<PreferenceRecord>& dataset) {
  if (dataset.empty()) throw Error("the preference dataset is empty");
  const auto split =
      split_dataset(make_pair_dataset(store, dataset), cfg.reward.test_fraction, derive_seed(cfg.seed, streams::kSplit));
  RewardStageResult r{RewardModel(derive_seed(cfg.seed, streams::kRewardInit)), {}, 0.0, 0.0, split.train.size(),
                      split.test.size()};
  TrainConfig tc = cfg.reward;
  tc.seed = derive_seed(cfg.seed, streams::kRewardShuffle);
  if (!split.train.empty()) {
    r.report = train(r.model, split.train, tc);
    r.mppa_train = mppa(r.model, split.train);
  }
  if (!split.test.empty()) r.mppa_test = mppa(r.model, split.test);
  return r;
}

nlohmann::json CheckpointMetrics::to_json() const {
  return {{"step", step},
          {"distance_mean", distance_mean},
          {"distance_std", distance_std},
          {"mean_path_length", mean_path_length}};
}

CheckpointMetrics evaluate_networks(const RunConfig& cfg, const MazeEnv& env, const std::vector<QNetwork>& nets,
                                    long step) {
  std::vector<double> distances;
  double path = 0.0;
  for (const auto& net : nets) {
    const auto e = evaluate_policy(env, net, cfg.eval_episode_length, cfg.eval_seeds, 0.0,
                                   derive_seed(cfg.seed, streams::kEvaluation));
    distances.insert(distances.end(), e.final_distances.begin(), e.final_distances.end());
    path += e.mean_path_length;
  }
  CheckpointMetrics m;
  m.step = step;
  std::tie(m.distance_mean, m.distance_std) = mean_std(distances);
  m.mean_path_length = nets.empty() ? 0.0 : path / static_cast<double>(nets.size());
  return m;
}

PolicyStageResult train_policy_stage(const RunConfig& cfg, const MazeEnv& env, const RewardSource& reward,
                                     const std::vector<QNetwork>& init) {
  if (!init.empty() && init.size() != static_cast<std::size_t>(cfg.policy_seeds))
    throw Error("need one initial Q-network per policy seed");
  PolicyStageResult out;
  for (int p = 0; p < cfg.policy_seeds; ++p) {
    DqnConfig d = cfg.dqn;
    d.seed = derive_seed(cfg.seed, streams::kPolicy + static_cast<std::uint64_t>(p));
    std::optional<QNetwork> start;
    if (!init.empty()) start = init[static_cast<std::size_t>(p)];
    out.runs.push_back(train_dqn(env, reward, d, cfg.checkpoints, start));
  }
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    std::vector<QNetwork> nets;
    for (const auto& run : out.runs) nets.push_back(run.checkpoints[c].network);
    out.checkpoints.push_back(evaluate_networks(cfg, env, nets, cfg.checkpoints[c]));
  }
  std::vector<QNetwork> finals;
  long steps = 0;
  for (const auto& run : out.runs) {
    finals.push_back(run.network);
    steps = std::max(steps, run.steps_run);
  }
  out.final = evaluate_networks(cfg, env, finals, steps);
  return out;
}

namespace {

void mark_synthetic(std::vector<PreferenceRecord>& records) {
  for (auto& r : records) {
    r.source = LabelSource::Synthetic;
    r.timestamp.clear();
  }
}

}  // namespace

RewardStages run_reward_stages(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.mode != PreferenceMode::Synthetic) throw Error("in-memory reward stages need synthetic preferences");
  RewardStages r{make_env(cfg), {}, {}, {}, {}, {}, {}, {}};
  r.store = collect_trajectories(cfg, r.env);
  r.aaf = build_aaf(r.store, cfg.delta);
  r.labels = label_synthetic(r.env, r.store, select_queries(cfg, r.aaf));
  if (cfg.generalise) {
    r.extensions = preferred_extensions(r.aaf, cfg.extension_cap);
    r.generalisation = generalise(cfg, r.env, r.store, r.aaf, r.extensions, r.labels, synthetic_labeler(r.env, r.store));
    mark_synthetic(r.generalisation.live_labels);
    r.dataset = r.generalisation.dataset;
  } else {
    r.dataset = r.labels;
  }
  r.reward = train_reward_stage(cfg, r.store, r.dataset);
  return r;
}

namespace {

template <typename F>
auto stage(RunDirectory& dir, const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    dir.write_error(name, e.what());
    throw StageError(name, e.what());
  }
}

std::unique_ptr<LabelingService> open_service(const RunConfig& cfg, const MazeEnv& env, const TrajectoryStore& store,
                                              const Aaf& aaf, const std::filesystem::path& log_path) {
  std::optional<PairLabeler> auto_labeler;
  if (cfg.auto_label) auto_labeler = synthetic_labeler(env, store);
  return std::make_unique<LabelingService>(env, store, aaf, log_path, cfg.service.port, cfg.service.timeout_seconds,
                                           cfg.service.ui_dir, std::move(auto_labeler));
}

// Step 3 (and, for live orderings, the labeler used in step 4) for one trajectory store.
struct LabelStage {
  std::vector<PreferenceRecord> labels;
  std::unique_ptr<LabelingService> service;
  PairLabeler live;
};

LabelStage collect_labels(const RunConfig& cfg, const MazeEnv& env, const TrajectoryStore& store, const Aaf& aaf,
                          const std::vector<IdPair>& pairs, bool ask_pairs, const std::filesystem::path& log_path) {
  LabelStage s;
  if (cfg.mode == PreferenceMode::Synthetic) {
    if (ask_pairs) {
      s.labels = label_synthetic(env, store, pairs);
      write_synthetic_log(log_path, pairs, s.labels);
    }
    s.live = synthetic_labeler(env, store);
    return s;
  }
  s.service = open_service(cfg, env, store, aaf, log_path);
  if (ask_pairs) s.labels = s.service->ask(pairs);
  s.live = s.service->labeler();
  return s;
}

nlohmann::json reward_metrics_json(const RewardStageResult& r) {
  return {{"mppa_train", r.mppa_train},
          {"mppa_test", r.mppa_test},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"initial_loss", r.report.initial_loss},
          {"final_loss", r.report.final_loss}};
}

void save_policies(RunDirectory& dir, const PolicyStageResult& p, const std::string& prefix) {
  for (std::size_t s = 0; s < p.runs.size(); ++s) {
    const std::string base = prefix + "qnet_seed" + std::to_string(s);
    dir.write_json(base + ".json", p.runs[s].network.to_json());
    for (const auto& c : p.runs[s].checkpoints)
      dir.write_json(base + "_step" + std::to_string(c.step) + ".json", c.network.to_json());
  }
}

nlohmann::json checkpoints_json(const std::vector<CheckpointMetrics>& cs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cs) out.push_back(c.to_json());
  return out;
}

void write_heatmaps(RunDirectory& dir, const RunConfig& cfg, const MazeEnv& env, const RewardModel& model,
                    const std::string& sub) {
  write_heatmap(compute_heatmap(env, model, cfg.heatmap_resolution), dir.path(sub));
  for (const char* f : {"value.csv", "best_action.csv", "value.ppm", "best_action.ppm"}) dir.record(sub + "/" + f);
}

}  // namespace

nlohmann::json run_pipeline(const RunConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  RunDirectory dir(out, config_hash(cfg));
  dir.write_json("config.json", config_to_json(cfg));
  std::filesystem::remove(dir.path("error.json"));

  const MazeEnv env = stage(dir, "environment", [&] { return make_env(cfg); });
  dir.write_json("maze.json", env.to_json());
  const TrajectoryStore store = stage(dir, "trajectories", [&] {
    auto s = collect_trajectories(cfg, env);
    s.write_jsonl(dir.path("trajectories.jsonl"));
    dir.record("trajectories.jsonl");
    return s;
  });
  const Aaf aaf = stage(dir, "aaf", [&] {
    auto a = build_aaf(store, cfg.delta);
    dir.write_json("aaf.json", a.to_json());
    return a;
  });

  // Live orderings in human-live mode gather all their labels while sorting.
  const bool ask_pairs = !(cfg.generalise && cfg.mode == PreferenceMode::HumanLive);
  LabelStage labels = stage(dir, "labels", [&] {
    auto s = collect_labels(cfg, env, store, aaf, ask_pairs ? select_queries(cfg, aaf) : std::vector<IdPair>{},
                            ask_pairs, dir.path("labels.jsonl"));
    return s;
  });

  std::vector<PreferenceRecord> dataset = labels.labels;
  nlohmann::json gen_json = nullptr;
  std::size_t n_source = labels.labels.size();
  if (cfg.generalise) {
    const auto extensions = stage(dir, "extensions", [&] {
      auto e = preferred_extensions(aaf, cfg.extension_cap);
      dir.write_json("extensions.json", extensions_to_json(e));
      return e;
    });
    auto g = stage(dir, "generalise",
                   [&] { return generalise(cfg, env, store, aaf, extensions, labels.labels, labels.live); });
    if (cfg.mode == PreferenceMode::Synthetic) mark_synthetic(g.live_labels);
    dataset = g.dataset;
    n_source += g.live_labels.size();
    gen_json = {{"n_extensions", extensions.size()},
                {"ordering", std::string(ordering_name(cfg.effective_ordering()))},
                {"order", g.order},
                {"comparisons", g.comparisons},
                {"ties", g.ties},
                {"sort_valid", g.sort_valid},
                {"live_labels", g.live_labels.size()}};
  }
  if (labels.service) labels.service.reset();
  if (std::filesystem::exists(dir.path("labels.jsonl"))) dir.record("labels.jsonl");
  write_records_jsonl(dir.path("dataset.jsonl"), dataset);
  dir.record("dataset.jsonl");

  const RewardStageResult reward = stage(dir, "reward_model", [&] {
    auto r = train_reward_stage(cfg, store, dataset);
    dir.write_json("reward_model.json", r.model.to_json());
    return r;
  });
  stage(dir, "heatmap", [&] { write_heatmaps(dir, cfg, env, reward.model, "heatmaps"); });

  const PolicyStageResult policy = stage(dir, "policy", [&] {
    auto p = train_policy_stage(cfg, env, model_reward_source(reward.model));
    save_policies(dir, p, "");
    return p;
  });

  return stage(dir, "evaluation", [&] {
    nlohmann::json m{{"config_hash", dir.config_hash()},
                     {"mppa_train", reward.mppa_train},
                     {"mppa_test", reward.mppa_test},
                     {"n_preferences", dataset.size()},
                     {"n_source_labels", n_source},
                     {"generalised", cfg.generalise},
                     {"distance_mean", policy.final.distance_mean},
                     {"distance_std", policy.final.distance_std},
                     {"mean_path_length", policy.final.mean_path_length},
                     {"checkpoints", checkpoints_json(policy.checkpoints)},
                     {"n_trajectories", store.size()},
                     {"n_attacks", aaf.undirected_attack_count()},
                     {"n_directed_attacks", aaf.directed_attack_count()},
                     {"generalisation", gen_json},
                     {"reward_model", reward_metrics_json(reward)}};
    dir.write_json("metrics.json", m);
    return m;
  });
}

nlohmann::json run_iterative(const RunConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  RunDirectory dir(out, config_hash(cfg));
  dir.write_json("config.json", config_to_json(cfg));
  std::filesystem::remove(dir.path("error.json"));

  const MazeEnv env = stage(dir, "environment", [&] { return make_env(cfg); });
  dir.write_json("maze.json", env.to_json());

  RunConfig step_cfg = cfg;
  step_cfg.dqn.step_budget = cfg.iteration.dqn_steps_per_iteration;
  step_cfg.checkpoints.clear();
  if (cfg.generalise) step_cfg.extension_order = ExtensionOrdering::Live;

  RewardModel model(derive_seed(cfg.seed, streams::kRewardInit));
  std::vector<QNetwork> policies;
  PairDataset all;
  std::size_t n_queries = 0;
  long total_steps = 0;
  nlohmann::json iterations = nlohmann::json::array();
  std::vector<CheckpointMetrics> per_iteration;
  double last_mppa = 0.0;
  CheckpointMetrics last_eval;
  const auto started = std::chrono::steady_clock::now();

  for (int k = 0; k < cfg.iteration.iterations; ++k) {
    if (k > 0 && cfg.iteration.wall_clock_seconds > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >=
            cfg.iteration.wall_clock_seconds)
      break;
    const std::string sub = "iteration_" + std::to_string(k) + "/";
    std::filesystem::create_directories(dir.path(sub));
    const std::uint64_t base = streams::kIteration + 16 * static_cast<std::uint64_t>(k);
    step_cfg.seed = derive_seed(cfg.seed, base);
    const int length = cfg.iteration.length_at(k);

    const TrajectoryStore store = stage(dir, sub + "trajectories", [&] {
      Rng rng(derive_seed(cfg.seed, base + 1));
      TrajectoryStore s(env.seed(), k);
      if (policies.empty()) {
        for (int n = 0; n < cfg.n_trajectories; ++n) s.add(random_rollout(env, length, rng));
      } else {
        const QNetwork& q = policies.front();
        const Policy greedy = [&q](const State& st) { return greedy_action(q, st); };
        for (int n = 0; n < cfg.n_trajectories; ++n)
          s.add(policy_rollout(env, greedy, length, env.start(), cfg.iteration.rollout_epsilon, rng));
      }
      s.write_jsonl(dir.path(sub + "trajectories.jsonl"));
      dir.record(sub + "trajectories.jsonl");
      return s;
    });
    const Aaf aaf = stage(dir, sub + "aaf", [&] {
      auto a = build_aaf(store, cfg.delta);
      dir.write_json(sub + "aaf.json", a.to_json());
      return a;
    });

    std::vector<PreferenceRecord> labels;
    std::vector<PreferenceRecord> dataset;
    stage(dir, sub + "labels", [&] {
      std::vector<IdPair> pairs;
      if (!cfg.generalise) {
        Rng rng(derive_seed(cfg.seed, base + 2));
        pairs = sample_queries(aaf, cfg.iteration.queries_per_iteration, rng);
      }
      auto ls = collect_labels(step_cfg, env, store, aaf, pairs, !cfg.generalise, dir.path(sub + "labels.jsonl"));
      labels = ls.labels;
      if (cfg.generalise && aaf.undirected_attack_count() > 0) {
        const auto extensions = preferred_extensions(aaf, cfg.extension_cap);
        dir.write_json(sub + "extensions.json", extensions_to_json(extensions));
        auto g = generalise(step_cfg, env, store, aaf, extensions, labels, ls.live);
        if (cfg.mode == PreferenceMode::Synthetic) mark_synthetic(g.live_labels);
        labels.insert(labels.end(), g.live_labels.begin(), g.live_labels.end());
        dataset = g.dataset;
      } else if (!cfg.generalise) {
        dataset = labels;
      }
      if (std::filesystem::exists(dir.path(sub + "labels.jsonl"))) dir.record(sub + "labels.jsonl");
      write_records_jsonl(dir.path(sub + "dataset.jsonl"), dataset);
      dir.record(sub + "dataset.jsonl");
    });
    n_queries += labels.size();

    const int offset = static_cast<int>(all.pool.size());
    for (const auto& t : store.all()) all.pool.push_back(t);
    for (const auto& r : dataset) all.pairs.push_back({r.winner + offset, r.loser + offset});

    stage(dir, sub + "reward_model", [&] {
      if (!all.empty()) {
        TrainConfig tc = cfg.reward;
        tc.epochs = cfg.iteration.reward_epochs;
        tc.seed = derive_seed(cfg.seed, base + 3);
        train(model, all, tc);
        last_mppa = mppa(model, all);
      }
      dir.write_json(sub + "reward_model.json", model.to_json());
    });

    const PolicyStageResult policy = stage(dir, sub + "policy", [&] {
      auto p = train_policy_stage(step_cfg, env, model_reward_source(model), policies);
      save_policies(dir, p, sub);
      return p;
    });
    policies.clear();
    for (const auto& run : policy.runs) policies.push_back(run.network);
    total_steps += policy.final.step;
    last_eval = policy.final;
    last_eval.step = total_steps;
    per_iteration.push_back(last_eval);

    nlohmann::json it{{"iteration", k},
                      {"trajectory_length", length},
                      {"n_attacks", aaf.undirected_attack_count()},
                      {"n_directed_attacks", aaf.directed_attack_count()},
                      {"n_queries", labels.size()},
                      {"n_preferences", dataset.size()},
                      {"mppa_train", last_mppa},
                      {"distance_mean", last_eval.distance_mean},
                      {"distance_std", last_eval.distance_std},
                      {"mean_path_length", last_eval.mean_path_length},
                      {"steps", total_steps}};
    dir.write_json(sub + "metrics.json", it);
    iterations.push_back(it);
  }
  stage(dir, "heatmap", [&] { write_heatmaps(dir, cfg, env, model, "heatmaps"); });

  nlohmann::json m{{"config_hash", dir.config_hash()},
                   {"mppa_train", last_mppa},
                   {"mppa_test", nullptr},
                   {"mppa_note", "train MPPA over all iterations' preferences; no held-out split"},
                   {"n_preferences", all.size()},
                   {"n_source_labels", n_queries},
                   {"generalised", cfg.generalise},
                   {"distance_mean", last_eval.distance_mean},
                   {"distance_std", last_eval.distance_std},
                   {"mean_path_length", last_eval.mean_path_length},
                   {"checkpoints", checkpoints_json(per_iteration)},
                   {"iterations", iterations}};
  dir.write_json("metrics.json", m);
  return m;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

std::string report_table(const std::vector<std::filesystem::path>& runs) {
  if (runs.empty()) throw StageError("report", "no runs given");
  std::vector<nlohmann::json> metrics;
  std::set<long> steps;
  for (const auto& run : runs) {
    const auto path = run / "metrics.json";
    if (!std::filesystem::exists(path)) throw StageError("report", "missing " + path.string());
    auto m = read_json(path);
    if (!m.is_object() || m.empty()) throw StageError("report", "empty metrics in " + path.string());
    for (const char* key : {"n_preferences", "mppa_test", "checkpoints"})
      if (!m.contains(key)) throw StageError("report", path.string() + " lacks " + key);
    for (const auto& c : m.at("checkpoints")) steps.insert(c.at("step").get<long>());
    metrics.push_back(std::move(m));
  }

  std::ostringstream out;
  out << "Final goal distance (normalised, mean ± std over policy seeds) after the given number of "
         "environment steps.\n\n";
  out << "| run | preferences | MPPA |";
  for (long s : steps) out << " distance @" << s << " |";
  out << "\n|---|---|---|";
  for (std::size_t k = 0; k < steps.size(); ++k) out << "---|";
  out << '\n';
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& m = metrics[r];
    out << "| " << runs[r].filename().string() << " | " << m.at("n_preferences").get<long>();
    if (m.value("generalised", false)) out << " (from " << m.at("n_source_labels").get<long>() << ")";
    out << " | " << (m.at("mppa_test").is_null() ? std::string("n/a") : fixed(m.at("mppa_test").get<double>(), 3))
        << " |";
    for (long s : steps) {
      std::string cell = " - ";
      for (const auto& c : m.at("checkpoints"))
        if (c.at("step").get<long>() == s)
          cell = " " + fixed(c.at("distance_mean").get<double>(), 3) + " ± " +
                 fixed(c.at("distance_std").get<double>(), 3) + " ";
      out << cell << '|';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace arl
