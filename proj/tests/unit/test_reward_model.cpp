#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>

#include "arl/error.hpp"
#include "arl/reward_model.hpp"
#include "support.hpp"

using namespace arl;

namespace {

RewardModel constant_model(double c) {
  RewardModel m(1);
  for (double& p : m.network().parameters()) p = 0.0;
  m.network().bias(m.network().layer_count() - 1)(0) = c;
  return m;
}

PairDataset random_dataset(int pool_size, int pairs, int length, std::uint64_t seed) {
  const MazeEnv env = generate_maze(seed, 4);
  Rng rng(seed);
  PairDataset d;
  d.pool = generate_random_store(env, pool_size, length, rng).all();
  std::uniform_int_distribution<int> pick(0, pool_size - 1);
  while (static_cast<int>(d.pairs.size()) < pairs) {
    const int a = pick(rng);
    const int b = pick(rng);
    if (a != b) d.pairs.push_back({a, b});
  }
  return d;
}

double loop_return(const RewardModel& m, const Trajectory& t) {
  double s = 0.0;
  for (const auto& st : t.steps) s += m.predict(st.state, st.action);
  return s;
}

}  // namespace

TEST_SUITE("reward_model") {

TEST_CASE("architecture and determinism") {
  const RewardModel m(3);
  CHECK(m.network().architecture().layers == std::vector<int>{6, 64, 64, 1});
  CHECK(m.network().architecture().hidden == Activation::Tanh);
  CHECK(m.network().parameter_count() == 6 * 64 + 64 + 64 * 64 + 64 + 64 + 1);
  CHECK(m.predict({0.3, 0.4}, Action::Left) == m.predict({0.3, 0.4}, Action::Left));
  CHECK(RewardModel(3).network() == m.network());
  CHECK_FALSE(RewardModel(4).network() == m.network());
}

TEST_CASE("zero output layer predicts zero") {
  RewardModel m(5);
  m.network().zero_output_layer();
  for (Action a : kActions) CHECK(m.predict({0.2, 0.9}, a) == 0.0);
}

TEST_CASE("hand-set single hidden path") {
  RewardModel m(1);
  for (double& p : m.network().parameters()) p = 0.0;
  auto& net = m.network();
  net.weight(0)(0, 0) = 2.0;   // x
  net.weight(0)(0, 2 + action_index(Action::Down)) = -1.0;
  net.bias(0)(0) = 0.5;
  net.weight(1)(0, 0) = 1.5;
  net.weight(2)(0, 0) = -3.0;
  net.bias(2)(0) = 0.25;
  const double x = 0.3;
  const double down = -3.0 * std::tanh(1.5 * std::tanh(2.0 * x - 1.0 + 0.5)) + 0.25;
  const double up = -3.0 * std::tanh(1.5 * std::tanh(2.0 * x + 0.5)) + 0.25;
  CHECK(m.predict({x, 0.8}, Action::Down) == doctest::Approx(down).epsilon(1e-14));
  CHECK(m.predict({x, 0.8}, Action::Up) == doctest::Approx(up).epsilon(1e-14));
}

TEST_CASE("input encoding") {
  Eigen::MatrixXd in(6, 2);
  encode_input({0.1, 0.7}, Action::Right, in, 0);
  encode_input({0.4, 0.2}, Action::Left, in, 1);
  Eigen::VectorXd c0(6);
  c0 << 0.1, 0.7, 0, 1, 0, 0;
  Eigen::VectorXd c1(6);
  c1 << 0.4, 0.2, 0, 0, 0, 1;
  CHECK(in.col(0) == c0);
  CHECK(in.col(1) == c1);
}

TEST_CASE("model_return") {
  const auto d = random_dataset(5, 1, 20, 2);
  CHECK(model_return(constant_model(0.0), d.pool[0]) == 0.0);
  CHECK(model_return(constant_model(0.7), d.pool[0]) == doctest::Approx(14.0));
  const RewardModel m(9);
  for (const auto& t : d.pool) CHECK(model_return(m, t) == doctest::Approx(loop_return(m, t)).epsilon(1e-12));
}

TEST_CASE("preference probability") {
  CHECK(preference_probability(0.0) == 0.5);
  CHECK(preference_probability(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(preference_probability(1000.0) == doctest::Approx(1.0));
  CHECK(preference_probability(-1000.0) >= 0.0);
  CHECK(std::isfinite(preference_probability(1000.0)));
  CHECK(std::isfinite(preference_probability(-1e4)));
  for (double g : {-30.0, -2.5, -0.1, 0.3, 4.0, 25.0})
    CHECK(preference_probability(g) == doctest::Approx(1.0 / (1.0 + std::exp(-g))).epsilon(1e-14));
}

TEST_CASE("pair probabilities are complementary") {
  const auto d = random_dataset(20, 1, 20, 4);
  Rng rng(1);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const RewardModel m(s);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        CHECK(std::abs(pair_probability(m, d.pool[i], d.pool[j]) + pair_probability(m, d.pool[j], d.pool[i]) - 1.0) <=
              1e-9);
  }
}

TEST_CASE("probabilities are invariant to a constant reward shift") {
  const auto d = random_dataset(10, 1, 20, 5);
  RewardModel m(12);
  RewardModel shifted = m;
  shifted.network().bias(2)(0) += 3.7;
  for (int i = 0; i < 10; ++i) {
    CHECK(model_return(shifted, d.pool[i]) - model_return(m, d.pool[i]) == doctest::Approx(20 * 3.7));
    for (int j = 0; j < 10; ++j)
      CHECK(std::abs(pair_probability(m, d.pool[i], d.pool[j]) - pair_probability(shifted, d.pool[i], d.pool[j])) <=
            1e-9);
  }
}

TEST_CASE("bt_loss") {
  const auto d = random_dataset(4, 1, 20, 6);
  CHECK(bt_loss(constant_model(0.0), d) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  // Probabilities 0.5, 0.75 and 0.9 come from gaps 0, ln 3 and ln 9.
  const double expected = -(std::log(0.5) + std::log(0.75) + std::log(0.9));
  CHECK(expected == doctest::Approx(1.0861).epsilon(1e-4));
  const double gaps[] = {0.0, std::log(3.0), std::log(9.0)};
  double total = 0.0;
  for (double g : gaps) total += -std::log(preference_probability(g));
  CHECK(total == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(bt_loss(constant_model(0.0), PairDataset{d.pool, {}}), Error);
  CHECK_THROWS_AS(bt_loss(constant_model(0.0), PairDataset{d.pool, {{1, 1}}}), Error);
  CHECK_THROWS_AS(bt_loss(constant_model(0.0), PairDataset{d.pool, {{0, 9}}}), Error);
}

TEST_CASE("bt_loss matches the per-pair definition") {
  const auto d = random_dataset(15, 40, 20, 7);
  const RewardModel m(8);
  double expected = 0.0;
  for (const auto& p : d.pairs) expected -= std::log(pair_probability(m, d.pool[p.winner], d.pool[p.loser]));
  CHECK(bt_loss(m, d) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(bt_loss(m, d) >= 0.0);
}

TEST_CASE("mppa") {
  const auto d = random_dataset(10, 30, 20, 9);
  CHECK(mppa(constant_model(0.0), d) == 0.5);

  const RewardModel m(10);
  PairDataset oriented{d.pool, {}};
  for (const auto& p : d.pairs) {
    const bool first = model_return(m, d.pool[p.winner]) > model_return(m, d.pool[p.loser]);
    oriented.pairs.push_back(first ? p : IndexPair{p.loser, p.winner});
  }
  CHECK(mppa(m, oriented) == 1.0);

  PairDataset four{oriented.pool, {oriented.pairs.begin(), oriented.pairs.begin() + 4}};
  std::swap(four.pairs[2].winner, four.pairs[2].loser);
  CHECK(mppa(m, four) == 0.75);
  CHECK_THROWS_AS(mppa(m, PairDataset{d.pool, {}}), Error);
}

TEST_CASE("analytic gradient matches central differences") {
  const auto d = random_dataset(12, 10, 20, 11);
  const RewardModel m(13);
  const auto grad = bt_loss_gradient(m, d);
  REQUIRE(grad.size() == m.network().parameter_count());

  RewardModel probe = m;
  auto params = probe.network().parameters();
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); i += 7) {
    const double p0 = params[i];
    params[i] = p0 + h;
    const double up = bt_loss(probe, d);
    params[i] = p0 - h;
    const double down = bt_loss(probe, d);
    params[i] = p0;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6}));
  }
  CHECK(worst <= 1e-4);

  CHECK(gradient_check(m, d, 1e-5, 500, 1) <= 1e-4);
  CHECK(gradient_check(m, d, 1e-5, 500, 1) == gradient_check(m, d, 1e-5, 500, 1));
}

TEST_CASE("final-bias gradient of a zero-output model") {
  const auto d = random_dataset(8, 6, 20, 14);
  RewardModel m(15);
  m.network().zero_output_layer();
  const auto grad = bt_loss_gradient(m, d);
  const std::size_t b = m.network().bias_offset(2);
  // Equal-length trajectories: the final bias shifts every return equally, so its gradient is 0.
  CHECK(grad[b] == doctest::Approx(0.0).scale(1.0));
  RewardModel probe = m;
  probe.network().parameters()[b] = 1e-5;
  const double up = bt_loss(probe, d);
  probe.network().parameters()[b] = -1e-5;
  const double down = bt_loss(probe, d);
  CHECK((up - down) / 2e-5 == doctest::Approx(grad[b]).scale(1.0));
  CHECK(gradient_check(m, d) <= 1e-4);
}

TEST_CASE("training separates a single pair") {
  const auto base = random_dataset(2, 1, 20, 16);
  PairDataset d{base.pool, {{0, 1}}};
  RewardModel m(17);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 1e-3;
  cfg.seed = 1;
  const auto report = train(m, d, cfg);
  CHECK(report.final_loss < 0.1);
  CHECK(report.final_loss <= report.initial_loss);
  CHECK(pair_probability(m, d.pool[0], d.pool[1]) > 0.9);
  CHECK(report.epoch_losses.size() == 300);
}

TEST_CASE("contradictory pairs converge to one half") {
  const auto base = random_dataset(2, 1, 20, 18);
  PairDataset d{base.pool, {{0, 1}, {1, 0}}};
  RewardModel m(19);
  TrainConfig cfg;
  cfg.epochs = 300;
  train(m, d, cfg);
  CHECK(pair_probability(m, d.pool[0], d.pool[1]) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("training on a separable toy set halves the loss and is deterministic") {
  // Winner is the trajectory whose summed x is larger: representable by a linear reward.
  auto d = random_dataset(30, 80, 20, 20);
  for (auto& p : d.pairs) {
    double xw = 0.0;
    double xl = 0.0;
    for (const auto& s : d.pool[p.winner].steps) xw += s.state.x;
    for (const auto& s : d.pool[p.loser].steps) xl += s.state.x;
    if (xl > xw) std::swap(p.winner, p.loser);
  }
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 4;
  RewardModel a(21);
  RewardModel b(21);
  const auto ra = train(a, d, cfg);
  const auto rb = train(b, d, cfg);
  CHECK(ra.final_loss <= 0.5 * ra.initial_loss);
  CHECK(a.network() == b.network());
  CHECK(ra.epoch_losses == rb.epoch_losses);
  CHECK(mppa(a, d) > 0.9);
}

TEST_CASE("training rejects bad input") {
  RewardModel m(1);
  const auto d = random_dataset(4, 3, 20, 22);
  CHECK_THROWS_AS(train(m, PairDataset{d.pool, {}}, TrainConfig{}), Error);
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(m, d, bad), Error);
}

TEST_CASE("divergence is reported") {
  const auto base = random_dataset(2, 1, 20, 23);
  PairDataset d{base.pool, {{0, 1}}};
  RewardModel m(24);
  for (double& p : m.network().parameters()) p = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(m, d, cfg), DivergenceError);
}

TEST_CASE("split_dataset") {
  const auto d = random_dataset(20, 50, 20, 25);
  const auto s = split_dataset(d, 0.2, 3);
  CHECK(s.test.size() == 10);
  CHECK(s.train.size() == 40);
  std::multiset<std::pair<int, int>> all;
  for (const auto& p : d.pairs) all.insert({p.winner, p.loser});
  std::multiset<std::pair<int, int>> joined;
  for (const auto* part : {&s.train, &s.test})
    for (const auto& p : part->pairs) joined.insert({p.winner, p.loser});
  CHECK(joined == all);
  const auto again = split_dataset(d, 0.2, 3);
  CHECK(again.test.pairs == s.test.pairs);
  CHECK_THROWS_AS(split_dataset(d, 1.0, 3), Error);
  CHECK_THROWS_AS(split_dataset(d, 0.0, 3), Error);
}

TEST_CASE("checkpoint round trip") {
  const RewardModel m(26);
  const auto path = std::filesystem::temp_directory_path() / "arl_reward_model.json";
  m.save(path);
  const RewardModel back = RewardModel::load(path);
  CHECK(back.network() == m.network());
  const auto j = m.to_json();
  CHECK(j.at("layers") == nlohmann::json::parse("[6,64,64,1]"));
  CHECK(j.at("activation") == "tanh");
  CHECK(j.at("seed") == 26);
  std::filesystem::remove(path);
}

}
