#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "arl/config.hpp"
#include "arl/elicitation.hpp"
#include "arl/error.hpp"
#include "arl/heatmap.hpp"
#include "arl/pipeline.hpp"

namespace fs = std::filesystem;
using namespace arl;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
};

RunConfig load(const Globals& g) {
  RunConfig cfg = g.config.empty() ? default_run_config() : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

MazeEnv load_env(const fs::path& dir) { return MazeEnv::from_json(read_json(dir / "maze.json")); }
TrajectoryStore load_store(const fs::path& dir) { return TrajectoryStore::read_jsonl(dir / "trajectories.jsonl"); }
Aaf load_aaf(const fs::path& dir) { return Aaf::from_json(read_json(dir / "aaf.json")); }

std::vector<PreferenceRecord> load_labels(const fs::path& dir) {
  const auto path = dir / "labels.jsonl";
  return fs::exists(path) ? records_from_log(LabelLog::read(path)) : std::vector<PreferenceRecord>{};
}

std::vector<QNetwork> load_qnets(const fs::path& dir, const std::vector<std::string>& files, int seeds) {
  std::vector<QNetwork> nets;
  if (!files.empty()) {
    for (const auto& f : files) nets.push_back(QNetwork::load(f));
  } else {
    for (int s = 0; s < seeds; ++s) nets.push_back(QNetwork::load(dir / ("qnet_seed" + std::to_string(s) + ".json")));
  }
  return nets;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Argumentative reward learning in a continuous maze"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed, overrides the config");
  app.add_option("--out", g.out, "Run directory")->capture_default_str();

  auto* gen = app.add_subcommand("gen-trajectories", "Generate the maze and random trajectories");
  gen->callback([&] {
    const auto cfg = load(g);
    RunDirectory dir(g.out, config_hash(cfg));
    dir.write_json("config.json", config_to_json(cfg));
    const MazeEnv env = make_env(cfg);
    dir.write_json("maze.json", env.to_json());
    collect_trajectories(cfg, env).write_jsonl(dir.path("trajectories.jsonl"));
    dir.record("trajectories.jsonl");
  });

  auto* aaf_cmd = app.add_subcommand("build-aaf", "Build the attack graph over stored trajectories");
  aaf_cmd->callback([&] {
    const auto cfg = load(g);
    const auto aaf = build_aaf(load_store(g.out), cfg.delta);
    write_json_file(fs::path(g.out) / "aaf.json", aaf.to_json());
    std::cout << aaf.arguments().size() << " arguments, " << aaf.undirected_attack_count() << " attacking pairs ("
              << aaf.directed_attack_count() << " directed attacks)\n";
  });

  auto* ext = app.add_subcommand("extensions", "Enumerate preferred extensions");
  ext->callback([&] {
    const auto cfg = load(g);
    const auto e = preferred_extensions(load_aaf(g.out), cfg.extension_cap);
    write_json_file(fs::path(g.out) / "extensions.json", extensions_to_json(e));
    std::cout << e.size() << " preferred extensions\n";
  });

  int port = -1;
  std::string ui_dir;
  bool auto_label = false;
  auto* serve = app.add_subcommand("elicit-serve", "Serve label queries to the browser UI until all are answered");
  serve->add_option("--port", port, "Port (default from config)");
  serve->add_option("--ui-dir", ui_dir, "Static UI files to serve at /");
  serve->add_flag("--auto", auto_label, "Answer queries with the synthetic oracle");
  serve->callback([&] {
    auto cfg = load(g);
    const MazeEnv env = load_env(g.out);
    const auto store = load_store(g.out);
    const auto aaf = load_aaf(g.out);
    std::optional<PairLabeler> labeler;
    if (auto_label || cfg.auto_label) labeler = synthetic_labeler(env, store);
    LabelingService service(env, store, aaf, fs::path(g.out) / "labels.jsonl", port >= 0 ? port : cfg.service.port,
                            cfg.service.timeout_seconds, ui_dir.empty() ? cfg.service.ui_dir : ui_dir,
                            std::move(labeler));
    std::cout << "serving on http://127.0.0.1:" << service.port() << "/" << std::endl;
    const auto records = service.ask(select_queries(cfg, aaf));
    std::cout << records.size() << " preferences recorded\n";
  });

  auto* label = app.add_subcommand("label-synthetic", "Label queried attacking pairs with the synthetic oracle");
  label->callback([&] {
    const auto cfg = load(g);
    const MazeEnv env = load_env(g.out);
    const auto store = load_store(g.out);
    const auto pairs = select_queries(cfg, load_aaf(g.out));
    write_synthetic_log(fs::path(g.out) / "labels.jsonl", pairs, label_synthetic(env, store, pairs));
    std::cout << pairs.size() << " labels\n";
  });

  auto* gen_cmd = app.add_subcommand("generalise", "Order extensions, lift preferences and write the dataset");
  gen_cmd->callback([&] {
    const auto cfg = load(g);
    const fs::path dir(g.out);
    const MazeEnv env = load_env(dir);
    const auto store = load_store(dir);
    const auto aaf = load_aaf(dir);
    const auto labels = load_labels(dir);
    if (!cfg.generalise) {
      write_records_jsonl(dir / "dataset.jsonl", labels);
      return;
    }
    const auto extensions = extensions_from_json(read_json(dir / "extensions.json"));
    std::unique_ptr<LabelingService> service;
    PairLabeler live = synthetic_labeler(env, store);
    if (cfg.effective_ordering() == ExtensionOrdering::Live && cfg.mode != PreferenceMode::Synthetic) {
      std::optional<PairLabeler> auto_labeler;
      if (cfg.auto_label) auto_labeler = live;
      service = std::make_unique<LabelingService>(env, store, aaf, dir / "live_labels.jsonl", cfg.service.port,
                                                  cfg.service.timeout_seconds, cfg.service.ui_dir, auto_labeler);
      live = service->labeler();
    }
    const auto result = generalise(cfg, env, store, aaf, extensions, labels, live);
    write_records_jsonl(dir / "dataset.jsonl", result.dataset);
    std::cout << result.dataset.size() << " preferences from " << labels.size() + result.live_labels.size()
              << " labels, " << result.comparisons << " comparisons\n";
  });

  auto* train_reward = app.add_subcommand("train-reward", "Train the reward model on dataset.jsonl");
  train_reward->callback([&] {
    const auto cfg = load(g);
    const fs::path dir(g.out);
    const auto r = train_reward_stage(cfg, load_store(dir), read_records_jsonl(dir / "dataset.jsonl"));
    r.model.save(dir / "reward_model.json");
    write_json_file(dir / "reward_metrics.json",
                    {{"mppa_train", r.mppa_train}, {"mppa_test", r.mppa_test}, {"final_loss", r.report.final_loss}});
    std::cout << "MPPA train " << r.mppa_train << ", test " << r.mppa_test << '\n';
  });

  bool true_reward = false;
  auto* train_policy = app.add_subcommand("train-policy", "Deep Q-learning on the learned (or true) reward");
  train_policy->add_flag("--true-reward", true_reward, "Train on the environment's reward instead");
  train_policy->callback([&] {
    const auto cfg = load(g);
    const fs::path dir(g.out);
    const MazeEnv env = load_env(dir);
    std::optional<RewardModel> model;
    if (!true_reward) model = RewardModel::load(dir / "reward_model.json");
    const auto p = train_policy_stage(cfg, env, model ? model_reward_source(*model) : true_reward_source(env));
    nlohmann::json cps = nlohmann::json::array();
    for (std::size_t s = 0; s < p.runs.size(); ++s) {
      p.runs[s].network.save(dir / ("qnet_seed" + std::to_string(s) + ".json"));
      for (const auto& c : p.runs[s].checkpoints)
        c.network.save(dir / ("qnet_seed" + std::to_string(s) + "_step" + std::to_string(c.step) + ".json"));
    }
    for (const auto& c : p.checkpoints) cps.push_back(c.to_json());
    write_json_file(dir / "policy_metrics.json", {{"final", p.final.to_json()}, {"checkpoints", cps}});
    std::cout << "final distance " << p.final.distance_mean << " ± " << p.final.distance_std << '\n';
  });

  std::vector<std::string> qnets;
  auto* evaluate = app.add_subcommand("evaluate", "Greedy evaluation of Q-networks from the fixed start");
  evaluate->add_option("--qnet", qnets, "Q-network files (default: qnet_seed<k>.json in the run directory)");
  evaluate->callback([&] {
    const auto cfg = load(g);
    const fs::path dir(g.out);
    const auto m = evaluate_networks(cfg, load_env(dir), load_qnets(dir, qnets, cfg.policy_seeds), 0);
    write_json_file(dir / "evaluation.json", m.to_json());
    std::cout << "distance " << m.distance_mean << " ± " << m.distance_std << '\n';
  });

  bool heat_true = false;
  auto* heat = app.add_subcommand("heatmap", "Reward heatmaps over the state space");
  heat->add_flag("--true-reward", heat_true, "Render the environment's reward instead");
  heat->callback([&] {
    const auto cfg = load(g);
    const fs::path dir(g.out);
    const MazeEnv env = load_env(dir);
    if (heat_true) {
      write_heatmap(compute_heatmap(env, true_reward_adapter(env), cfg.heatmap_resolution), dir / "heatmaps_true");
    } else {
      write_heatmap(compute_heatmap(env, RewardModel::load(dir / "reward_model.json"), cfg.heatmap_resolution),
                    dir / "heatmaps");
    }
  });

  auto* pipeline = app.add_subcommand("pipeline", "Run steps 1-6 once");
  pipeline->callback([&] {
    const auto m = run_pipeline(load(g), g.out);
    std::cout << m.dump(2) << '\n';
  });

  auto* iterate = app.add_subcommand("iterate", "Run the iterative protocol");
  iterate->callback([&] {
    const auto m = run_iterative(load(g), g.out);
    std::cout << m.dump(2) << '\n';
  });

  std::vector<std::string> runs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Summary table over run directories");
  report->add_option("runs", runs, "Run directories")->required();
  report->add_option("--output", report_out, "Write the table here instead of stdout");
  report->callback([&] {
    std::vector<fs::path> paths(runs.begin(), runs.end());
    const auto table = report_table(paths);
    if (report_out.empty()) {
      std::cout << table;
    } else {
      std::ofstream(report_out) << table;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StageError& e) {
    std::cerr << "stage '" << e.stage() << "' failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
