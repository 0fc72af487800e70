#include "arl/kernels/attack.hpp"

#include "arl/error.hpp"

namespace arl::kernels {

bool stepwise_exceeds(const Trajectory& a, const Trajectory& b, double delta) {
  const double delta_sq = delta * delta;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const double dx = a.steps[i].state.x - b.steps[i].state.x;
    const double dy = a.steps[i].state.y - b.steps[i].state.y;
    if (dx * dx + dy * dy > delta_sq) return true;
  }
  return false;
}

namespace {

void check_lengths(std::span<const Trajectory> ts) {
  for (const auto& t : ts)
    if (t.length() != ts.front().length())
      throw Error("attacks are only defined between trajectories of equal length");
}

}  // namespace

namespace serial {

std::vector<std::uint8_t> attack_matrix(std::span<const Trajectory> trajectories, double delta) {
  check_lengths(trajectories);
  const std::size_t n = trajectories.size();
  std::vector<std::uint8_t> m(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::uint8_t hit = stepwise_exceeds(trajectories[i], trajectories[j], delta) ? 1 : 0;
      m[i * n + j] = hit;
      m[j * n + i] = hit;
    }
  }
  return m;
}

}  // namespace serial

namespace parallel {

std::vector<std::uint8_t> attack_matrix(std::span<const Trajectory> trajectories, double delta) {
  check_lengths(trajectories);
  const auto n = static_cast<std::ptrdiff_t>(trajectories.size());
  std::vector<std::uint8_t> m(static_cast<std::size_t>(n * n), 0);
  // Row i owns every cell (i, j) and (j, i) with j > i, so writes never overlap.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      const std::uint8_t hit = stepwise_exceeds(trajectories[i], trajectories[j], delta) ? 1 : 0;
      m[i * n + j] = hit;
      m[j * n + i] = hit;
    }
  }
  return m;
}

}  // namespace parallel

}  // namespace arl::kernels
