// Serial reference kernels against their OpenMP versions.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "arl/argumentation.hpp"
#include "arl/heatmap.hpp"
#include "arl/kernels/attack.hpp"
#include "arl/kernels/maximal_sets.hpp"
#include "arl/kernels/mlp_gradient.hpp"
#include "arl/reward_model.hpp"
#include "arl/trajectory.hpp"

using namespace arl;

namespace {

TrajectoryStore bench_store(int n) {
  const MazeEnv env = generate_maze(1, 6);
  Rng rng(1);
  return generate_random_store(env, n, 20, rng);
}

template <auto Kernel>
void BM_attack(benchmark::State& state) {
  const auto store = bench_store(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(store.all(), 0.2));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

// Random sparse conflict graph; sparse graphs have many maximal independent sets.
kernels::ConflictGraph bench_graph(int n, double p) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution edge(p);
  kernels::ConflictGraph g(n, Bitset(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (edge(rng)) {
        g[i].set(j);
        g[j].set(i);
      }
  return g;
}

template <auto Kernel>
void BM_maximal_sets(benchmark::State& state) {
  const auto g = bench_graph(static_cast<int>(state.range(0)), 0.3);
  std::size_t found = 0;
  for (auto _ : state) {
    const auto sets = Kernel(g, 10'000'000);
    found = sets.size();
    benchmark::DoNotOptimize(sets.data());
  }
  state.counters["sets"] = static_cast<double>(found);
}

template <auto Kernel>
void BM_gradient(benchmark::State& state) {
  const RewardModel m(2);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(RewardModel::kInputWidth, state.range(0));
  const kernels::OutputGradient g = [](const Eigen::MatrixXd& out) -> Eigen::MatrixXd { return out; };
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(m.network(), x, g));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_heatmap_serial(benchmark::State& state) {
  const MazeEnv env = generate_maze(1, 6);
  const RewardModel m(2);
  for (auto _ : state) benchmark::DoNotOptimize(serial::compute_heatmap(env, m, static_cast<int>(state.range(0))));
}

void BM_heatmap_parallel(benchmark::State& state) {
  const MazeEnv env = generate_maze(1, 6);
  const RewardModel m(2);
  for (auto _ : state) benchmark::DoNotOptimize(compute_heatmap(env, m, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_attack<kernels::serial::attack_matrix>)->Name("attack_matrix/serial")->Arg(100)->Arg(400);
BENCHMARK(BM_attack<kernels::parallel::attack_matrix>)->Name("attack_matrix/parallel")->Arg(100)->Arg(400);
BENCHMARK(BM_maximal_sets<kernels::serial::maximal_independent_sets>)
    ->Name("maximal_sets/serial")
    ->Arg(40)
    ->Arg(60)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_maximal_sets<kernels::parallel::maximal_independent_sets>)
    ->Name("maximal_sets/parallel")
    ->Arg(40)
    ->Arg(60)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gradient<kernels::serial::forward_backward>)->Name("forward_backward/serial")->Arg(640)->Arg(6400);
BENCHMARK(BM_gradient<kernels::parallel::forward_backward>)->Name("forward_backward/parallel")->Arg(640)->Arg(6400);
BENCHMARK(BM_heatmap_serial)->Name("heatmap/serial")->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_heatmap_parallel)->Name("heatmap/parallel")->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
