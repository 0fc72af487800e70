#include <doctest.h>

#include <filesystem>
#include <set>

#include "arl/error.hpp"
#include "arl/policy.hpp"
#include "support.hpp"

using namespace arl;

namespace {

QNetwork zeroed(std::uint64_t seed) {
  QNetwork q(seed);
  for (double& p : q.network().parameters()) p = 0.0;
  return q;
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("architecture") {
  const QNetwork q(1);
  CHECK(q.network().architecture().layers == std::vector<int>{2, 64, 64, 4});
  CHECK(q.network().architecture().hidden == Activation::Relu);
  CHECK_THROWS_AS(QNetwork(Mlp({{6, 4, 1}, Activation::Relu}, 0)), Error);
}

TEST_CASE("greedy action") {
  CHECK(greedy_action(zeroed(0), {0.3, 0.3}) == Action::Up);

  QNetwork right = zeroed(0);
  right.network().bias(2)(1) = 0.5;
  CHECK(greedy_action(right, {0.3, 0.3}) == Action::Right);

  // Right and Left tied above the rest: Right comes first.
  QNetwork tie = zeroed(0);
  tie.network().bias(2)(1) = 1.0;
  tie.network().bias(2)(3) = 1.0;
  CHECK(greedy_action(tie, {0.1, 0.9}) == Action::Right);

  // Hand-set ReLU path: hidden unit 0 = relu(y - 0.5) feeds Down.
  QNetwork path = zeroed(0);
  path.network().weight(0)(0, 1) = 1.0;
  path.network().bias(0)(0) = -0.5;
  path.network().weight(1)(0, 0) = 1.0;
  path.network().weight(2)(2, 0) = 1.0;
  path.network().bias(2)(3) = 0.1;
  CHECK(greedy_action(path, {0.5, 0.9}) == Action::Down);  // 0.4 > 0.1
  CHECK(greedy_action(path, {0.5, 0.55}) == Action::Left); // 0.05 < 0.1
  const auto q = path.q_values({0.5, 0.9});
  CHECK(q[2] == doctest::Approx(0.4));

  const QNetwork r(7);
  CHECK(greedy_action(r, {0.4, 0.6}) == greedy_action(r, {0.4, 0.6}));
}

TEST_CASE("greedy rollouts are invariant to positive affine maps of the Q-values") {
  const MazeEnv env = generate_maze(3, 6);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const QNetwork q(seed);
    QNetwork scaled = q;
    auto& net = scaled.network();
    net.weight(2) *= 2.5;
    net.bias(2) = net.bias(2) * 2.5 + Eigen::VectorXd::Constant(4, -1.3);
    Rng a(1);
    Rng b(1);
    const Policy pq = [&](const State& s) { return greedy_action(q, s); };
    const Policy ps = [&](const State& s) { return greedy_action(scaled, s); };
    const auto ta = policy_rollout(env, pq, 100, env.start(), 0.0, a);
    const auto tb = policy_rollout(env, ps, 100, env.start(), 0.0, b);
    CHECK(ta == tb);
  }
}

TEST_CASE("replay buffer") {
  ReplayBuffer buf(5);
  CHECK_THROWS_AS(ReplayBuffer(0), Error);
  Rng rng(0);
  CHECK_THROWS_AS(buf.sample(1, rng), Error);
  for (int k = 0; k < 12; ++k) {
    buf.push({{k * 0.01, 0.0}, Action::Up, static_cast<double>(k), {0.0, 0.0}});
    CHECK(buf.size() == std::min(k + 1, 5));
  }
  std::set<double> stored;
  for (std::size_t i = 0; i < buf.size(); ++i) stored.insert(buf[i].r);
  CHECK(stored == std::set<double>{7, 8, 9, 10, 11});
  std::set<double> drawn;
  for (const auto& t : buf.sample(500, rng)) {
    CHECK(stored.count(t.r));
    drawn.insert(t.r);
  }
  CHECK(drawn == stored);
}

TEST_CASE("epsilon schedule") {
  DqnConfig cfg;
  cfg.epsilon_start = 1.0;
  cfg.epsilon_end = 0.05;
  cfg.epsilon_decay_steps = 100;
  CHECK(epsilon_at(cfg, 0) == 1.0);
  CHECK(epsilon_at(cfg, 50) == doctest::Approx(0.525));
  CHECK(epsilon_at(cfg, 100) == 0.05);
  CHECK(epsilon_at(cfg, 1000) == 0.05);
}

TEST_CASE("zero step budget returns the initial network") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  DqnConfig cfg;
  cfg.step_budget = 0;
  cfg.seed = 4;
  const auto r = train_dqn(env, true_reward_source(env), cfg);
  CHECK(r.network == QNetwork(4));
  CHECK(r.steps_run == 0);
  const QNetwork init(99);
  CHECK(train_dqn(env, true_reward_source(env), cfg, {}, init).network == init);
}

TEST_CASE("training is deterministic and checkpoints come back in request order") {
  const MazeEnv env = generate_maze(5, 6);
  DqnConfig cfg;
  cfg.step_budget = 3000;
  cfg.epsilon_decay_steps = 1500;
  cfg.warmup_steps = 200;
  cfg.seed = 11;
  const auto a = train_dqn(env, true_reward_source(env), cfg, {3000, 1000});
  const auto b = train_dqn(env, true_reward_source(env), cfg, {3000, 1000});
  CHECK(a.network == b.network);
  REQUIRE(a.checkpoints.size() == 2);
  CHECK(a.checkpoints[0].step == 3000);
  CHECK(a.checkpoints[1].step == 1000);
  CHECK(a.checkpoints[0].network == a.network);
  CHECK_FALSE(a.checkpoints[1].network == a.network);
  CHECK(a.steps_run == 3000);
  cfg.seed = 12;
  CHECK_FALSE(train_dqn(env, true_reward_source(env), cfg).network == a.network);
}

TEST_CASE("invalid DQN configuration") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  DqnConfig cfg;
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(train_dqn(env, true_reward_source(env), cfg), Error);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train_dqn(env, true_reward_source(env), cfg), Error);
}

TEST_CASE("with gamma 0 the Q-values regress onto immediate rewards") {
  const MazeEnv env = generate_maze(6, 6);
  ReplayBuffer buf(2000);
  Rng rng(3);
  std::uniform_int_distribution<int> act(0, 3);
  for (int k = 0; k < 2000; ++k) {
    const State s = env.sample_initial_state(rng);
    const Action a = kActions[act(rng)];
    const State n = env.transition(s, a);
    buf.push({s, a, env.true_reward(s, a, n), n});
  }
  auto mse = [&](const QNetwork& q) {
    double total = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const double e = q.q_values(buf[i].s)[action_index(buf[i].a)] - buf[i].r;
      total += e * e;
    }
    return total / static_cast<double>(buf.size());
  };
  QNetwork online(8);
  const QNetwork target = online;
  Adam adam(online.network().parameter_count(), 1e-3);
  const double before = mse(online);
  for (int k = 0; k < 2000; ++k) dqn_update(online, target, adam, buf.sample(32, rng), 0.0);
  CHECK(mse(online) <= 0.5 * before);
}

TEST_CASE("evaluation statistics") {
  const MazeEnv env(0, {}, {0.9, 0.9}, {0.1, 0.1});
  const Policy up = [](const State&) { return Action::Up; };
  const auto one = evaluate_rollouts(env, up, 10, 1);
  CHECK(one.std == 0.0);
  // Ten steps up from (0.1, 0.1): final state (0.1, 0.3).
  const double expected = std::hypot(0.8, 0.6) / std::sqrt(2.0);
  CHECK(one.mean == doctest::Approx(expected));
  CHECK(one.mean_path_length == doctest::Approx(0.2));
  const auto many = evaluate_rollouts(env, up, 10, 5);
  CHECK(many.std == 0.0);
  CHECK(many.final_distances.size() == 5);

  const auto noisy = evaluate_rollouts(env, up, 50, 6, 1.0, 3);
  CHECK(noisy.std > 0.0);
  const auto [m, s] = mean_std(noisy.final_distances);
  CHECK(noisy.mean == doctest::Approx(m));
  CHECK(noisy.std == doctest::Approx(s));
  CHECK(mean_std({1.0, 3.0}).second == doctest::Approx(1.0));
  CHECK_THROWS_AS(evaluate_rollouts(env, up, 10, 0), Error);
}

TEST_CASE("a policy stuck against a wall has zero spread") {
  // Wall directly above the start: Up never moves.
  const MazeEnv env(0, {{0.0, 0.2, 0.03, 0.1}}, kDefaultGoal, kDefaultStart);
  const Policy up = [](const State&) { return Action::Up; };
  const auto r = evaluate_rollouts(env, up, 200, 5);
  CHECK(r.std == 0.0);
  CHECK(r.mean == doctest::Approx(env.normalised_goal_distance(env.start())));
  CHECK(r.mean_path_length == 0.0);
}

TEST_CASE("DQN on the true reward moves towards the goal in an open maze") {
  const MazeEnv env(0, {}, kDefaultGoal, kDefaultStart);
  DqnConfig cfg;
  cfg.step_budget = 50'000;
  cfg.epsilon_decay_steps = 25'000;
  cfg.seed = 1;
  const auto r = train_dqn(env, true_reward_source(env), cfg);
  int improved = 0;
  for (State start : {State{0.02, 0.02}, State{0.6, 0.1}, State{0.1, 0.6}}) {
    const MazeEnv from(0, {}, kDefaultGoal, start);
    const auto e = evaluate_policy(from, r.network, 200, 1);
    if (e.mean < from.normalised_goal_distance(start)) ++improved;
  }
  CHECK(improved >= 2);
}

TEST_CASE("checkpoint round trip") {
  const QNetwork q(31);
  const auto path = std::filesystem::temp_directory_path() / "arl_qnet.json";
  q.save(path);
  CHECK(QNetwork::load(path) == q);
  CHECK(q.to_json().at("layers") == nlohmann::json::parse("[2,64,64,4]"));
  std::filesystem::remove(path);
}

}
