#include <doctest.h>

#include <filesystem>

#include "arl/error.hpp"
#include "arl/trajectory.hpp"
#include "support.hpp"

using namespace arl;

TEST_SUITE("trajectories") {

TEST_CASE("random rollout lengths and determinism") {
  const MazeEnv env = generate_maze(3, 6);
  Rng rng(1);
  const Trajectory t = random_rollout(env, 20, rng);
  CHECK(t.length() == 20);
  CHECK(is_consistent(env, t));

  Rng r1(5);
  const Trajectory single = random_rollout(env, 1, r1);
  CHECK(single.length() == 1);
  CHECK(single.start_state() == single.state(0));

  Rng a(9);
  Rng b(9);
  CHECK(random_rollout(env, 20, a) == random_rollout(env, 20, b));
}

TEST_CASE("policy rollout") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  Rng rng(0);
  const Policy up = [](const State&) { return Action::Up; };
  const Trajectory t = policy_rollout(env, up, 3, {0.5, 0.5}, 0.0, rng);
  REQUIRE(t.length() == 3);
  CHECK(t.state(0) == State{0.5, 0.5});
  CHECK(t.state(1).y == doctest::Approx(0.52));
  CHECK(t.state(2).y == doctest::Approx(0.54));
  CHECK(t.state(2).x == doctest::Approx(0.5));

  Rng a(4);
  Rng b(4);
  CHECK(policy_rollout(env, up, 10, {0.2, 0.2}, 0.0, a) == policy_rollout(env, up, 10, {0.2, 0.2}, 0.0, b));
}

TEST_CASE("epsilon 1 ignores the policy") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  const Policy up = [](const State&) { return Action::Up; };
  Rng rng(17);
  std::array<int, 4> counts{};
  for (int k = 0; k < 200; ++k)
    for (const auto& s : policy_rollout(env, up, 20, {0.5, 0.5}, 1.0, rng).steps) ++counts[action_index(s.action)];
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("returns") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  Rng rng(0);
  const Trajectory t = random_rollout(env, 3, rng);
  const StepReward one = [](const State&, Action, const State&) { return 1.0; };
  CHECK(trajectory_return(env, t, one, 1.0) == doctest::Approx(3.0));
  CHECK(trajectory_return(env, t, one, 0.5) == doctest::Approx(1.75));

  const MazeEnv maze = generate_maze(21, 6);
  Rng r2(8);
  for (int k = 0; k < 50; ++k) {
    const Trajectory long_t = random_rollout(maze, 20, r2);
    CHECK(true_return(maze, long_t) == doctest::Approx(oracle::discounted_return(maze, long_t, 1.0)).epsilon(1e-12));
    CHECK(true_return(maze, long_t, 0.9) ==
          doctest::Approx(oracle::discounted_return(maze, long_t, 0.9)).epsilon(1e-12));
  }
}

TEST_CASE("return is monotone in a single per-step reward") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  Rng rng(2);
  const Trajectory t = random_rollout(env, 10, rng);
  const State target = t.state(4);
  const StepReward base = [](const State& s, Action, const State&) { return s.x; };
  const StepReward bumped = [&](const State& s, Action, const State&) { return s.x + (s == target ? 0.5 : 0.0); };
  CHECK(trajectory_return(env, t, bumped) > trajectory_return(env, t, base));
}

TEST_CASE("inconsistent trajectories are detected") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  Rng rng(3);
  Trajectory t = random_rollout(env, 5, rng);
  t.steps[3].state.x += 0.1;
  CHECK_FALSE(is_consistent(env, t));
}

TEST_CASE("store assigns dense ids and round-trips through JSONL") {
  const MazeEnv env = generate_maze(4, 6);
  Rng rng(6);
  TrajectoryStore store = generate_random_store(env, 12, 20, rng);
  CHECK(store.size() == 12);
  for (int i = 0; i < 12; ++i) CHECK(store.at(i).id == i);
  for (const auto& t : store.all()) CHECK(is_consistent(env, t));

  const auto path = std::filesystem::temp_directory_path() / "arl_store_roundtrip.jsonl";
  store.write_jsonl(path);
  const auto back = TrajectoryStore::read_jsonl(path);
  REQUIRE(back.size() == store.size());
  for (int i = 0; i < 12; ++i) CHECK(back.at(i) == store.at(i));
  std::filesystem::remove(path);

  const auto j = trajectory_to_json(store.at(0));
  CHECK(j.at("id") == 0);
  CHECK(j.at("steps").size() == 20);
  CHECK(j.at("steps")[0][1].is_string());
  CHECK_THROWS_AS(store.at(12), Error);
}

}
