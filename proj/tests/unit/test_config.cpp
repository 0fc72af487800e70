#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "arl/config.hpp"
#include "arl/error.hpp"

using namespace arl;

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const RunConfig c = default_run_config();
  CHECK(c.n_trajectories == 100);
  CHECK(c.trajectory_length == 20);
  CHECK(c.delta == 0.2);
  CHECK(c.mode == PreferenceMode::Synthetic);
  CHECK(c.reward.learning_rate == 1e-3);
  CHECK(c.reward.batch_size == 32);
  CHECK(c.reward.epochs == 200);
  CHECK(c.reward.test_fraction == 0.2);
  CHECK(c.dqn.replay_capacity == 10'000);
  CHECK(c.dqn.target_sync_interval == 500);
  CHECK(c.dqn.epsilon_start == 1.0);
  CHECK(c.dqn.epsilon_end == 0.05);
  CHECK(c.dqn.epsilon_decay_steps == c.dqn.step_budget / 2);
  CHECK(c.checkpoints == std::vector<long>{50'000, 100'000, 150'000});
  CHECK(c.eval_episode_length == 200);
  CHECK(c.extension_cap == 10'000);
  CHECK(c.iteration.queries_per_iteration == 10);
  CHECK(c.service.port == 8321);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("JSON round trip is exact") {
  RunConfig c = default_run_config();
  c.seed = 17;
  c.env_seed = 4;
  c.mode = PreferenceMode::HumanLive;
  c.label_budget = 200;
  c.extension_order = ExtensionOrdering::LabelCount;
  c.reward.epochs = 7;
  c.dqn.fixed_start = true;
  c.iteration.length_increment = 5;
  c.service.ui_dir = "ui/dist";
  const auto j = config_to_json(c);
  const RunConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.env_seed == 4u);
  CHECK(back.mode == PreferenceMode::HumanLive);
}

TEST_CASE("partial files keep defaults") {
  const RunConfig c = config_from_json(nlohmann::json::parse(R"({"seed": 5, "dqn": {"step_budget": 1000,
      "epsilon_decay_steps": 500}, "checkpoints": [1000]})"));
  CHECK(c.seed == 5);
  CHECK(c.dqn.step_budget == 1000);
  CHECK(c.dqn.gamma == 0.99);
  CHECK(c.n_trajectories == 100);
  CHECK_FALSE(c.env_seed.has_value());
  CHECK(c.effective_env_seed() == 5);
}

TEST_CASE("unknown and malformed keys are rejected") {
  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json::parse(R"({"sed": 1})")), "unknown config key 'sed'", Error);
  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json::parse(R"({"dqn": {"gama": 0.5}})")),
                       "unknown config key 'dqn.gama'", Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_trajectories": "many"})")), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"preference_mode": "telepathy"})")), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"reward_model": 3})")), Error);
}

TEST_CASE("validation") {
  const std::vector<void (*)(RunConfig&)> breakers{
      [](RunConfig& c) { c.delta = 0.0; },
      [](RunConfig& c) { c.n_trajectories = 1; },
      [](RunConfig& c) { c.reward.test_fraction = 1.0; },
      [](RunConfig& c) { c.dqn.gamma = -0.1; },
      [](RunConfig& c) { c.checkpoints = {200'000}; },
      [](RunConfig& c) { c.heatmap_resolution = 1; },
      [](RunConfig& c) { c.service.port = 70'000; },
  };
  for (auto brk : breakers) {
    RunConfig c = default_run_config();
    brk(c);
    CHECK_THROWS_AS(c.validate(), Error);
  }
}

TEST_CASE("effective ordering") {
  RunConfig c;
  CHECK(c.effective_ordering() == ExtensionOrdering::ReturnSum);
  c.mode = PreferenceMode::Human;
  CHECK(c.effective_ordering() == ExtensionOrdering::LabelCount);
  c.mode = PreferenceMode::HumanLive;
  CHECK(c.effective_ordering() == ExtensionOrdering::Live);
  c.extension_order = ExtensionOrdering::ReturnSum;
  CHECK(c.effective_ordering() == ExtensionOrdering::ReturnSum);
  for (auto o : {ExtensionOrdering::Auto, ExtensionOrdering::ReturnSum, ExtensionOrdering::LabelCount,
                 ExtensionOrdering::Live})
    CHECK(ordering_from_name(ordering_name(o)) == o);
  for (auto m : {PreferenceMode::Synthetic, PreferenceMode::Human, PreferenceMode::HumanLive})
    CHECK(mode_from_name(mode_name(m)) == m);
}

TEST_CASE("config hash and seed derivation") {
  RunConfig a = default_run_config();
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.seed = 1;
  CHECK(config_hash(a) != config_hash(b));

  CHECK(derive_seed(3, 1) == derive_seed(3, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m)
    for (std::uint64_t s = 0; s < 20; ++s) seen.insert(derive_seed(m, s));
  CHECK(seen.size() == 400);
}

TEST_CASE("load_config reads files") {
  const auto path = std::filesystem::temp_directory_path() / "arl_config_test.json";
  std::ofstream(path) << R"({"seed": 9, "label_budget": 100, "generalise": false})";
  const RunConfig c = load_config(path);
  CHECK(c.seed == 9);
  CHECK(c.label_budget == 100);
  CHECK_FALSE(c.generalise);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), Error);
}

}
