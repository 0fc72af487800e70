#include "arl/env.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "arl/error.hpp"

namespace arl {

double distance(const State& a, const State& b) { return std::hypot(a.x - b.x, a.y - b.y); }

State displacement(Action a) {
  switch (a) {
    case Action::Up:
      return {0.0, kStepSize};
    case Action::Right:
      return {kStepSize, 0.0};
    case Action::Down:
      return {0.0, -kStepSize};
    case Action::Left:
      return {-kStepSize, 0.0};
  }
  return {};
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Up:
      return "Up";
    case Action::Right:
      return "Right";
    case Action::Down:
      return "Down";
    case Action::Left:
      return "Left";
  }
  return "?";
}

Action action_from_name(std::string_view name) {
  for (Action a : kActions) {
    if (action_name(a) == name) return a;
  }
  throw Error("unknown action name '" + std::string(name) + "'");
}

namespace {

bool in_unit_square(const State& s) { return s.x >= 0.0 && s.x <= 1.0 && s.y >= 0.0 && s.y <= 1.0; }

void validate_wall(const Wall& w) {
  if (!(w.x_min < w.x_max) || !(w.y_min < w.y_max))
    throw Error("wall rectangle must have x_min < x_max and y_min < y_max");
  if (w.x_min < 0.0 || w.x_max > 1.0 || w.y_min < 0.0 || w.y_max > 1.0)
    throw Error("wall rectangle must lie inside the unit square");
}

}  // namespace

MazeEnv::MazeEnv(std::uint64_t seed, std::vector<Wall> walls, State goal, State start,
                 double max_distance)
    : seed_(seed), walls_(std::move(walls)), goal_(goal), start_(start), max_distance_(max_distance) {
  if (!(max_distance_ > 0.0)) throw Error("max_distance must be positive");
  for (const auto& w : walls_) validate_wall(w);
  if (!in_unit_square(goal_)) throw Error("goal outside the unit square");
  if (!in_unit_square(start_)) throw Error("start outside the unit square");
  if (blocked(goal_)) throw Error("goal lies inside a wall");
  if (blocked(start_)) throw Error("start lies inside a wall");
}

bool MazeEnv::blocked(const State& s) const {
  if (!in_unit_square(s)) return true;
  return std::any_of(walls_.begin(), walls_.end(), [&](const Wall& w) { return w.contains(s); });
}

State MazeEnv::transition(const State& s, Action a) const {
  const State d = displacement(a);
  const State next{s.x + d.x, s.y + d.y};
  return blocked(next) ? s : next;
}

double MazeEnv::normalised_goal_distance(const State& s) const {
  return std::clamp(distance(s, goal_) / max_distance_, 0.0, 1.0);
}

double MazeEnv::true_reward(const State& s, Action /*a*/, const State& next) const {
  const double d = normalised_goal_distance(next);
  if (d <= kGoalRadius) return 1.0;
  const double base = (1.0 - d) * (1.0 - d);
  return s == next ? base - 0.1 : base;
}

State MazeEnv::sample_initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const State s{unit(rng), unit(rng)};
    if (!blocked(s)) return s;
  }
}

nlohmann::json MazeEnv::to_json() const {
  nlohmann::json walls = nlohmann::json::array();
  for (const auto& w : walls_) walls.push_back({w.x_min, w.x_max, w.y_min, w.y_max});
  return {{"seed", seed_},
          {"goal", {goal_.x, goal_.y}},
          {"start", {start_.x, start_.y}},
          {"walls", walls}};
}

MazeEnv MazeEnv::from_json(const nlohmann::json& j) {
  std::vector<Wall> walls;
  for (const auto& w : j.at("walls")) {
    if (w.size() != 4) throw Error("wall entry must have four coordinates");
    walls.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()});
  }
  const auto& g = j.at("goal");
  State start = kDefaultStart;
  if (j.contains("start")) start = {j["start"][0].get<double>(), j["start"][1].get<double>()};
  return MazeEnv(j.at("seed").get<std::uint64_t>(), std::move(walls),
                 {g[0].get<double>(), g[1].get<double>()}, start);
}

std::vector<std::uint8_t> free_cell_mask(const MazeEnv& env) {
  constexpr double cell = 1.0 / kFloodGrid;
  std::vector<std::uint8_t> mask(kFloodGrid * kFloodGrid);
  for (int j = 0; j < kFloodGrid; ++j) {
    for (int i = 0; i < kFloodGrid; ++i) {
      const State centre{(i + 0.5) * cell, (j + 0.5) * cell};
      mask[j * kFloodGrid + i] = env.blocked(centre) ? 0 : 1;
    }
  }
  return mask;
}

namespace {

int cell_of(double v) { return std::clamp(static_cast<int>(v * kFloodGrid), 0, kFloodGrid - 1); }

std::vector<std::uint8_t> flood(const std::vector<std::uint8_t>& mask, const State& from) {
  std::vector<std::uint8_t> seen(mask.size(), 0);
  const int i0 = cell_of(from.x);
  const int j0 = cell_of(from.y);
  if (!mask[j0 * kFloodGrid + i0]) return seen;
  std::queue<std::pair<int, int>> frontier;
  frontier.emplace(i0, j0);
  seen[j0 * kFloodGrid + i0] = 1;
  constexpr int di[] = {0, 1, 0, -1};
  constexpr int dj[] = {1, 0, -1, 0};
  while (!frontier.empty()) {
    const auto [i, j] = frontier.front();
    frontier.pop();
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k];
      const int nj = j + dj[k];
      if (ni < 0 || nj < 0 || ni >= kFloodGrid || nj >= kFloodGrid) continue;
      const int idx = nj * kFloodGrid + ni;
      if (!mask[idx] || seen[idx]) continue;
      seen[idx] = 1;
      frontier.emplace(ni, nj);
    }
  }
  return seen;
}

}  // namespace

int flood_fill_reachable(const MazeEnv& env, const State& from) {
  const auto seen = flood(free_cell_mask(env), from);
  return static_cast<int>(std::count(seen.begin(), seen.end(), 1));
}

namespace {

constexpr int kMaxMazeAttempts = 1000;
constexpr double kWallThickness = 0.04;
constexpr double kMinWallLength = 0.2;
constexpr double kMaxWallLength = 0.5;

Wall random_wall(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> length_dist(kMinWallLength, kMaxWallLength);
  const bool horizontal = unit(rng) < 0.5;
  const double length = length_dist(rng);
  const double along = unit(rng) * (1.0 - length);
  const double across = unit(rng) * (1.0 - kWallThickness);
  if (horizontal) return {along, along + length, across, across + kWallThickness};
  return {across, across + kWallThickness, along, along + length};
}

bool acceptable(const MazeEnv& env) {
  const auto mask = free_cell_mask(env);
  for (int j = 0; j < kFloodGrid; ++j) {
    bool any_free = false;
    for (int i = 0; i < kFloodGrid && !any_free; ++i) any_free = mask[j * kFloodGrid + i] != 0;
    if (!any_free) return false;
  }
  const auto seen = flood(mask, env.goal());
  const int reached = static_cast<int>(std::count(seen.begin(), seen.end(), 1));
  if (2 * reached < kFloodGrid * kFloodGrid) return false;
  const State& s = env.start();
  return seen[cell_of(s.y) * kFloodGrid + cell_of(s.x)] != 0;
}

}  // namespace

MazeEnv generate_maze(std::uint64_t seed, int wall_count, State goal, State start) {
  if (wall_count < 0) throw Error("wall_count must be non-negative");
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaxMazeAttempts; ++attempt) {
    std::vector<Wall> walls;
    walls.reserve(wall_count);
    for (int k = 0; k < wall_count; ++k) walls.push_back(random_wall(rng));
    const bool covers_endpoint = std::any_of(walls.begin(), walls.end(), [&](const Wall& w) {
      return w.contains(goal) || w.contains(start);
    });
    if (covers_endpoint) continue;
    MazeEnv env(seed, std::move(walls), goal, start);
    if (acceptable(env)) return env;
  }
  throw Error("no valid maze found for seed " + std::to_string(seed) + " after " +
              std::to_string(kMaxMazeAttempts) + " attempts");
}

}  // namespace arl
