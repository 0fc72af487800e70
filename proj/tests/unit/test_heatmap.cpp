#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "arl/error.hpp"
#include "arl/heatmap.hpp"

using namespace arl;

namespace {

int count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("heatmap") {

TEST_CASE("normalise") {
  const auto v = normalise({2.0, 4.0, 3.0});
  CHECK(v == std::vector<double>{0.0, 1.0, 0.5});
  for (double x : normalise({1.5, 1.5, 1.5})) CHECK(x == 0.5);
}

TEST_CASE("zero model gives a constant grid") {
  const MazeEnv env = generate_maze(1, 6);
  RewardModel m(2);
  m.network().zero_output_layer();
  const Heatmap h = compute_heatmap(env, m, 10);
  for (double v : h.value) CHECK(v == 0.5);
  for (int a : h.best_action) CHECK(a == 0);
}

TEST_CASE("true reward peaks in the goal region") {
  const MazeEnv env = generate_maze(2, 6);
  const int res = 40;
  const Heatmap h = compute_heatmap(env, true_reward_adapter(env), res);
  double top = 0.0;
  for (double v : h.value) top = std::max(top, v);
  CHECK(top == 1.0);
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i) {
      const State c = h.cell_centre(i, j);
      const int k = j * res + i;
      CHECK(h.value[k] >= 0.0);
      CHECK(h.value[k] <= 1.0);
      CHECK(h.best_action[k] >= 0);
      CHECK(h.best_action[k] <= 3);
      CHECK(static_cast<bool>(h.wall[k]) == env.blocked(c));
      double expected = -1.0;
      for (Action a : kActions) expected = std::max(expected, env.true_reward(c, a, env.transition(c, a)));
      CHECK(h.raw[k] == doctest::Approx(expected));
      bool all_goal = true;
      for (Action a : kActions) all_goal = all_goal && env.normalised_goal_distance(env.transition(c, a)) <= 0.3;
      if (all_goal) CHECK(h.value[k] == top);
    }
}

TEST_CASE("batched model heatmap matches the serial reference and per-cell evaluation") {
  const MazeEnv env = generate_maze(3, 6);
  const RewardModel m(4);
  const Heatmap fast = compute_heatmap(env, m, 33);
  const Heatmap ref = serial::compute_heatmap(env, m, 33);
  const Heatmap cell = compute_heatmap(env, [&](const State& s, Action a) { return m.predict(s, a); }, 33);
  CHECK(fast.best_action == ref.best_action);
  CHECK(fast.wall == ref.wall);
  for (std::size_t k = 0; k < fast.raw.size(); ++k) {
    CHECK(fast.raw[k] == doctest::Approx(ref.raw[k]).epsilon(1e-12));
    CHECK(fast.raw[k] == doctest::Approx(cell.raw[k]).epsilon(1e-12));
  }
}

TEST_CASE("files") {
  const MazeEnv env = generate_maze(5, 6);
  const auto dir = std::filesystem::temp_directory_path() / "arl_heatmap_test";
  std::filesystem::remove_all(dir);
  write_heatmap(compute_heatmap(env, true_reward_adapter(env), 100), dir);
  CHECK(count_lines(dir / "value.csv") == 100 * 100 + 1);
  CHECK(count_lines(dir / "best_action.csv") == 100 * 100 + 1);
  std::ifstream csv(dir / "value.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x,y,value,wall");
  std::ifstream ppm(dir / "value.ppm", std::ios::binary);
  std::string magic;
  int w = 0;
  int h = 0;
  ppm >> magic >> w >> h;
  CHECK(magic == "P6");
  CHECK(w == 100);
  CHECK(h == 100);
  CHECK(std::filesystem::exists(dir / "best_action.ppm"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("resolution below 2 is rejected") {
  const MazeEnv env = generate_maze(5, 0);
  CHECK_THROWS_AS(compute_heatmap(env, true_reward_adapter(env), 1), Error);
}

}
