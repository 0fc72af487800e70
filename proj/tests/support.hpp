#pragma once

// Independent reference implementations used as test oracles. They favour the
// most literal reading of each definition over speed.

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "arl/argumentation.hpp"
#include "arl/env.hpp"
#include "arl/trajectory.hpp"

namespace oracle {

using Pairs = std::set<std::pair<int, int>>;

inline bool attacks(const Pairs& undirected, int a, int b) {
  return undirected.count({std::min(a, b), std::max(a, b)}) > 0;
}

/// Every subset of `args` that is conflict-free and cannot be extended, by exhaustive search.
inline std::vector<std::vector<int>> maximal_conflict_free(const std::vector<int>& args, const Pairs& undirected) {
  const int n = static_cast<int>(args.size());
  auto conflict_free = [&](unsigned mask) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((mask >> i & 1U) && (mask >> j & 1U) && attacks(undirected, args[i], args[j])) return false;
    return true;
  };
  std::vector<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1U << n); ++mask) {
    if (!conflict_free(mask)) continue;
    bool maximal = true;
    for (int i = 0; i < n && maximal; ++i)
      if (!(mask >> i & 1U) && conflict_free(mask | (1U << i))) maximal = false;
    if (!maximal) continue;
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1U) members.push_back(args[i]);
    std::sort(members.begin(), members.end());
    out.push_back(members);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// (t1, t2) iff some extension holding t1 ranks above every extension holding t2.
/// `rank[e]` is the position of extension e in the order, 0 being best.
inline Pairs lift(const std::vector<std::vector<int>>& extensions, const std::vector<int>& rank) {
  std::set<int> ids;
  for (const auto& e : extensions) ids.insert(e.begin(), e.end());
  auto holds = [&](std::size_t e, int t) {
    return std::find(extensions[e].begin(), extensions[e].end(), t) != extensions[e].end();
  };
  Pairs out;
  for (int t1 : ids)
    for (int t2 : ids) {
      if (t1 == t2) continue;
      bool exists = false;
      for (std::size_t p1 = 0; p1 < extensions.size() && !exists; ++p1) {
        if (!holds(p1, t1)) continue;
        bool all = true;
        for (std::size_t p2 = 0; p2 < extensions.size() && all; ++p2)
          if (holds(p2, t2) && !(rank[p1] < rank[p2])) all = false;
        exists = all;
      }
      if (exists) out.insert({t1, t2});
    }
  return out;
}

/// Directed attacks (b, a) kept unless a is preferred to b.
inline Pairs reduce(const Pairs& undirected, const Pairs& prefers) {
  Pairs out;
  for (const auto& [i, j] : undirected)
    for (const auto& [b, a] : {std::pair{i, j}, std::pair{j, i}})
      if (!prefers.count({a, b})) out.insert({b, a});
  return out;
}

inline bool stepwise_attack(const arl::Trajectory& t1, const arl::Trajectory& t2, double delta) {
  for (std::size_t i = 0; i < t1.steps.size(); ++i) {
    const double dx = t1.steps[i].state.x - t2.steps[i].state.x;
    const double dy = t1.steps[i].state.y - t2.steps[i].state.y;
    if (std::sqrt(dx * dx + dy * dy) > delta) return true;
  }
  return false;
}

/// Reward written out case by case.
inline double reward(const arl::MazeEnv& env, const arl::State& s, const arl::State& next) {
  const double d =
      std::min(1.0, std::hypot(next.x - env.goal().x, next.y - env.goal().y) / env.max_distance());
  if (d <= 0.3) return 1.0;
  const double base = (1.0 - d) * (1.0 - d);
  return s == next ? base - 0.1 : base;
}

/// Re-simulates the trajectory and sums rewards, discounting by gamma.
inline double discounted_return(const arl::MazeEnv& env, const arl::Trajectory& t, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  arl::State s = t.steps.front().state;
  for (const auto& step : t.steps) {
    const arl::State d = arl::displacement(step.action);
    arl::State n{s.x + d.x, s.y + d.y};
    if (env.blocked(n)) n = s;
    total += weight * reward(env, s, n);
    weight *= gamma;
    s = n;
  }
  return total;
}

/// sum_{i=2..n} ceil(log2 i) by repeated doubling.
inline long insertion_bound(long n) {
  long total = 0;
  for (long i = 2; i <= n; ++i) {
    long c = 0;
    for (long p = 1; p < i; p *= 2) ++c;
    total += c;
  }
  return total;
}

}  // namespace oracle
