#include "arl/heatmap.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "arl/error.hpp"
#include "arl/kernels/mlp_gradient.hpp"

namespace arl {

State Heatmap::cell_centre(int i, int j) const {
  return {(i + 0.5) / resolution, (j + 0.5) / resolution};
}

std::vector<double> normalise(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double span = *hi - *lo;
  std::vector<double> out(values.size(), 0.5);
  if (span > 0.0)
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = (values[k] - min) / span;
  return out;
}

namespace {

Heatmap empty_grid(const MazeEnv& env, int resolution) {
  if (resolution < 2) throw Error("heatmap resolution must be >= 2");
  Heatmap h;
  h.resolution = resolution;
  const auto cells = static_cast<std::size_t>(resolution) * resolution;
  h.raw.resize(cells);
  h.best_action.resize(cells);
  h.wall.resize(cells);
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i) h.wall[j * resolution + i] = env.blocked(h.cell_centre(i, j)) ? 1 : 0;
  return h;
}

void reduce_actions(Heatmap& h, std::size_t cell, const std::array<double, 4>& r) {
  int best = 0;
  for (int a = 1; a < 4; ++a)
    if (r[a] > r[best]) best = a;
  h.raw[cell] = r[best];
  h.best_action[cell] = best;
}

// Four columns per cell, in action order.
Eigen::MatrixXd grid_inputs(const Heatmap& h) {
  const auto cells = static_cast<Eigen::Index>(h.raw.size());
  Eigen::MatrixXd in(RewardModel::kInputWidth, 4 * cells);
  for (int j = 0; j < h.resolution; ++j)
    for (int i = 0; i < h.resolution; ++i) {
      const auto cell = static_cast<Eigen::Index>(j) * h.resolution + i;
      for (int a = 0; a < 4; ++a) encode_input(h.cell_centre(i, j), kActions[a], in, 4 * cell + a);
    }
  return in;
}

void finish_from_outputs(Heatmap& h, const Eigen::MatrixXd& out) {
  for (std::size_t cell = 0; cell < h.raw.size(); ++cell) {
    const auto c = static_cast<Eigen::Index>(cell);
    reduce_actions(h, cell, {out(0, 4 * c), out(0, 4 * c + 1), out(0, 4 * c + 2), out(0, 4 * c + 3)});
  }
  h.value = normalise(h.raw);
}

}  // namespace

Heatmap compute_heatmap(const MazeEnv& env, const StateActionReward& reward, int resolution) {
  Heatmap h = empty_grid(env, resolution);
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i) {
      const State s = h.cell_centre(i, j);
      reduce_actions(h, static_cast<std::size_t>(j) * resolution + i,
                     {reward(s, Action::Up), reward(s, Action::Right), reward(s, Action::Down), reward(s, Action::Left)});
    }
  h.value = normalise(h.raw);
  return h;
}

Heatmap compute_heatmap(const MazeEnv& env, const RewardModel& model, int resolution) {
  Heatmap h = empty_grid(env, resolution);
  finish_from_outputs(h, kernels::parallel::forward(model.network(), grid_inputs(h)));
  return h;
}

namespace serial {
Heatmap compute_heatmap(const MazeEnv& env, const RewardModel& model, int resolution) {
  Heatmap h = empty_grid(env, resolution);
  finish_from_outputs(h, kernels::serial::forward(model.network(), grid_inputs(h)));
  return h;
}
}  // namespace serial

StateActionReward true_reward_adapter(const MazeEnv& env) {
  return [&env](const State& s, Action a) { return env.true_reward(s, a, env.transition(s, a)); };
}

namespace {

using Rgb = std::array<unsigned char, 3>;

// Blue (low) through white to red (high).
Rgb diverging(double v) {
  v = std::clamp(v, 0.0, 1.0);
  auto mix = [](double a, double b, double t) { return static_cast<unsigned char>(a + (b - a) * t + 0.5); };
  if (v < 0.5) {
    const double t = v / 0.5;
    return {mix(40, 255, t), mix(70, 255, t), mix(200, 255, t)};
  }
  const double t = (v - 0.5) / 0.5;
  return {mix(255, 200, t), mix(255, 40, t), mix(255, 40, t)};
}

constexpr std::array<Rgb, 4> kActionColours{{{230, 160, 30}, {60, 160, 70}, {70, 110, 200}, {170, 70, 170}}};
constexpr Rgb kWallColour{20, 20, 20};

void write_ppm(const Heatmap& h, const std::filesystem::path& path, const std::function<Rgb(std::size_t)>& colour) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << h.resolution << ' ' << h.resolution << "\n255\n";
  // Image rows run top to bottom, so the highest y comes first.
  for (int j = h.resolution - 1; j >= 0; --j)
    for (int i = 0; i < h.resolution; ++i) {
      const auto cell = static_cast<std::size_t>(j) * h.resolution + i;
      const Rgb c = h.wall[cell] ? kWallColour : colour(cell);
      out.write(reinterpret_cast<const char*>(c.data()), 3);
    }
}

template <typename T>
void write_csv(const Heatmap& h, const std::filesystem::path& path, const char* column, const std::vector<T>& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "x,y," << column << ",wall\n";
  for (int j = 0; j < h.resolution; ++j)
    for (int i = 0; i < h.resolution; ++i) {
      const auto cell = static_cast<std::size_t>(j) * h.resolution + i;
      const State s = h.cell_centre(i, j);
      out << s.x << ',' << s.y << ',' << v[cell] << ',' << int{h.wall[cell]} << '\n';
    }
}

}  // namespace

void write_heatmap(const Heatmap& h, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_csv(h, dir / "value.csv", "value", h.value);
  write_csv(h, dir / "best_action.csv", "action", h.best_action);
  write_ppm(h, dir / "value.ppm", [&](std::size_t cell) { return diverging(h.value[cell]); });
  write_ppm(h, dir / "best_action.ppm", [&](std::size_t cell) { return kActionColours[h.best_action[cell]]; });
}

}  // namespace arl
