#include <doctest.h>

#include <random>

#include "arl/env.hpp"
#include "arl/kernels/attack.hpp"
#include "arl/kernels/maximal_sets.hpp"
#include "arl/kernels/mlp_gradient.hpp"
#include "arl/trajectory.hpp"

using namespace arl;

namespace {

kernels::ConflictGraph random_graph(int n, double p, std::mt19937_64& rng) {
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

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("attack matrix: parallel equals serial") {
  const MazeEnv env = generate_maze(4, 6);
  Rng rng(2);
  for (int n : {0, 1, 7, 120}) {
    const auto store = generate_random_store(env, n, 20, rng);
    const auto& ts = store.all();
    for (double delta : {0.05, 0.2, 0.5}) {
      const auto s = kernels::serial::attack_matrix(ts, delta);
      CHECK(s.size() == static_cast<std::size_t>(n * n));
      CHECK(kernels::parallel::attack_matrix(ts, delta) == s);
      for (int i = 0; i < n; ++i) {
        CHECK(s[i * n + i] == 0);
        for (int j = 0; j < n; ++j) CHECK(s[i * n + j] == s[j * n + i]);
      }
    }
  }
}

TEST_CASE("maximal independent sets: parallel equals serial") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 30;
    const auto g = random_graph(n, 0.15 + 0.01 * (trial % 40), rng);
    const auto s = kernels::serial::maximal_independent_sets(g, 100'000);
    CHECK(kernels::parallel::maximal_independent_sets(g, 100'000) == s);
    CHECK(std::is_sorted(s.begin(), s.end()));
  }
  CHECK(kernels::serial::maximal_independent_sets({}, 10) == std::vector<std::vector<int>>{{}});
}

TEST_CASE("maximal independent sets: both kernels enforce the cap") {
  kernels::ConflictGraph matching(12, Bitset(12));
  for (int k = 0; k < 12; k += 2) {
    matching[k].set(k + 1);
    matching[k + 1].set(k);
  }
  CHECK(kernels::serial::maximal_independent_sets(matching, 64).size() == 64);
  CHECK(kernels::parallel::maximal_independent_sets(matching, 64).size() == 64);
  CHECK_THROWS(kernels::serial::maximal_independent_sets(matching, 63));
  CHECK_THROWS(kernels::parallel::maximal_independent_sets(matching, 63));
}

TEST_CASE("MLP forward and gradient: parallel equals serial") {
  std::mt19937_64 rng(5);
  for (auto act : {Activation::Tanh, Activation::Relu}) {
    const Mlp net({{6, 64, 64, 3}, act}, 3);
    for (int cols : {1, 255, 256, 700}) {
      const Eigen::MatrixXd x = random_matrix(6, cols, rng);
      const Eigen::MatrixXd g = random_matrix(3, cols, rng);

      const Eigen::MatrixXd fs = kernels::serial::forward(net, x);
      const Eigen::MatrixXd fp = kernels::parallel::forward(net, x);
      CHECK((fs - fp).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((fs - net.forward(x)).cwiseAbs().maxCoeff() <= 1e-12);

      const auto ps = kernels::serial::parameter_gradient(net, x, g);
      const auto pp = kernels::parallel::parameter_gradient(net, x, g);
      REQUIRE(ps.size() == net.parameter_count());
      REQUIRE(pp.size() == ps.size());
      double worst = 0.0;
      double scale = 0.0;
      for (std::size_t k = 0; k < ps.size(); ++k) {
        worst = std::max(worst, std::abs(ps[k] - pp[k]));
        scale = std::max(scale, std::abs(ps[k]));
      }
      CHECK(worst <= 1e-10 * std::max(1.0, scale));

      const kernels::OutputGradient sq = [](const Eigen::MatrixXd& out) -> Eigen::MatrixXd { return 2.0 * out; };
      const auto bs = kernels::serial::forward_backward(net, x, sq);
      const auto bp = kernels::parallel::forward_backward(net, x, sq);
      REQUIRE(bs.size() == bp.size());
      for (std::size_t k = 0; k < bs.size(); ++k) CHECK(bs[k] == doctest::Approx(bp[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("output-layer gradient in closed form") {
  // Linear output: d/db = sum of output grads, d/dW(0,k) = sum of hidden_k * grad.
  const Mlp net({{2, 4, 1}, Activation::Tanh}, 1);
  Eigen::MatrixXd x(2, 3);
  x << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  Eigen::MatrixXd g(1, 3);
  g << 1.0, -2.0, 0.5;
  const auto grad = kernels::serial::parameter_gradient(net, x, g);
  CHECK(grad[net.bias_offset(1)] == doctest::Approx(-0.5));
  const Eigen::MatrixXd h = (net.weight(0) * x).colwise() + Eigen::VectorXd(net.bias(0));
  const Eigen::MatrixXd a = h.array().tanh();
  for (int k = 0; k < 4; ++k)
    CHECK(grad[net.weight_offset(1) + k] == doctest::Approx((a.row(k).array() * g.row(0).array()).sum()));
}

}
