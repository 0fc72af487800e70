#include "arl/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "arl/error.hpp"
#include "arl/kernels/mlp_gradient.hpp"

namespace arl {

RewardModel::RewardModel(std::uint64_t seed)
    : net_(MlpArchitecture{{kInputWidth, kHidden, kHidden, 1}, Activation::Tanh}, seed) {}

RewardModel::RewardModel(Mlp net) : net_(std::move(net)) {
  if (net_.input_width() != kInputWidth || net_.output_width() != 1)
    throw Error("reward model network must map 6 inputs to 1 output");
}

void encode_input(const State& s, Action a, Eigen::MatrixXd& inputs, Eigen::Index col) {
  inputs(0, col) = s.x;
  inputs(1, col) = s.y;
  for (int k = 0; k < 4; ++k) inputs(2 + k, col) = 0.0;
  inputs(2 + action_index(a), col) = 1.0;
}

Eigen::MatrixXd encode_trajectory(const Trajectory& t) {
  Eigen::MatrixXd in(RewardModel::kInputWidth, static_cast<Eigen::Index>(t.length()));
  for (std::size_t i = 0; i < t.length(); ++i)
    encode_input(t.steps[i].state, t.steps[i].action, in, static_cast<Eigen::Index>(i));
  return in;
}

double RewardModel::predict(const State& s, Action a) const {
  Eigen::MatrixXd in(kInputWidth, 1);
  encode_input(s, a, in, 0);
  return net_.forward(in)(0, 0);
}

RewardModel RewardModel::from_json(const nlohmann::json& j) { return RewardModel(Mlp::from_json(j)); }

void RewardModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

RewardModel RewardModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return from_json(nlohmann::json::parse(in));
}

double model_return(const RewardModel& m, const Trajectory& t) {
  return m.network().forward(encode_trajectory(t)).sum();
}

double preference_probability(double return_gap) {
  // exp(R1) / (exp(R1) + exp(R2)) after subtracting max(R1, R2).
  const double e1 = return_gap >= 0.0 ? 1.0 : std::exp(return_gap);
  const double e2 = return_gap >= 0.0 ? std::exp(-return_gap) : 1.0;
  return e1 / (e1 + e2);
}

double pair_probability(const RewardModel& m, const Trajectory& t1, const Trajectory& t2) {
  return preference_probability(model_return(m, t1) - model_return(m, t2));
}

double pair_loss(double gap) { return std::max(-gap, 0.0) + std::log1p(std::exp(-std::abs(gap))); }

namespace {

std::vector<double> pool_returns(const RewardModel& m, const std::vector<Trajectory>& pool) {
  Eigen::Index cols = 0;
  for (const auto& t : pool) cols += static_cast<Eigen::Index>(t.length());
  Eigen::MatrixXd in(RewardModel::kInputWidth, cols);
  Eigen::Index c = 0;
  for (const auto& t : pool)
    for (const auto& st : t.steps) encode_input(st.state, st.action, in, c++);
  const Eigen::MatrixXd r = kernels::parallel::forward(m.network(), in);
  std::vector<double> out(pool.size(), 0.0);
  c = 0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto len = static_cast<Eigen::Index>(pool[k].length());
    out[k] = r.middleCols(c, len).sum();
    c += len;
  }
  return out;
}

}  // namespace

void PairDataset::validate() const {
  const auto n = static_cast<int>(pool.size());
  for (const auto& p : pairs) {
    if (p.winner == p.loser) throw Error("degenerate preference pair");
    if (p.winner < 0 || p.loser < 0 || p.winner >= n || p.loser >= n)
      throw Error("preference pair refers outside the trajectory pool");
  }
}

DatasetSplit split_dataset(const PairDataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("test_fraction must lie in (0, 1)");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(data.size())));
  DatasetSplit split{{data.pool, {}}, {data.pool, {}}};
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_test ? split.test : split.train).pairs.push_back(data.pairs[order[k]]);
  return split;
}

double bt_loss(const RewardModel& m, const PairDataset& data) {
  if (data.empty()) throw Error("bt_loss of an empty dataset");
  data.validate();
  const auto returns = pool_returns(m, data.pool);
  double total = 0.0;
  for (const auto& p : data.pairs) total += pair_loss(returns[p.winner] - returns[p.loser]);
  return total;
}

double mppa(const RewardModel& m, const PairDataset& data) {
  if (data.empty()) throw Error("mppa of an empty dataset");
  data.validate();
  const auto returns = pool_returns(m, data.pool);
  double correct = 0.0;
  for (const auto& p : data.pairs) {
    const double prob = preference_probability(returns[p.winner] - returns[p.loser]);
    if (prob > 0.5)
      correct += 1.0;
    else if (prob == 0.5)
      correct += 0.5;
  }
  return correct / static_cast<double>(data.size());
}

namespace {

// Gradient of the summed loss over `pairs`, each scaled by `scale`, touching only
// the trajectories the pairs mention. Returns the unscaled summed loss.
double batch_gradient(const RewardModel& m, const std::vector<Eigen::MatrixXd>& encoded,
                      const std::vector<IndexPair>& pairs, double scale, std::vector<double>& grad,
                      std::vector<int>& slot) {
  std::vector<int> used;
  for (const auto& p : pairs) {
    for (int id : {p.winner, p.loser}) {
      if (slot[id] < 0) {
        slot[id] = static_cast<int>(used.size());
        used.push_back(id);
      }
    }
  }
  std::vector<Eigen::Index> offset(used.size() + 1, 0);
  for (std::size_t k = 0; k < used.size(); ++k) offset[k + 1] = offset[k] + encoded[used[k]].cols();
  Eigen::MatrixXd in(RewardModel::kInputWidth, offset.back());
  for (std::size_t k = 0; k < used.size(); ++k) in.middleCols(offset[k], encoded[used[k]].cols()) = encoded[used[k]];

  double loss = 0.0;
  grad = kernels::parallel::forward_backward(m.network(), in, [&](const Eigen::MatrixXd& rewards) {
    std::vector<double> returns(used.size());
    for (std::size_t k = 0; k < used.size(); ++k)
      returns[k] = rewards.middleCols(offset[k], offset[k + 1] - offset[k]).sum();
    std::vector<double> d_return(used.size(), 0.0);
    for (const auto& p : pairs) {
      const int w = slot[p.winner];
      const int l = slot[p.loser];
      const double gap = returns[w] - returns[l];
      loss += pair_loss(gap);
      const double push = (1.0 - preference_probability(gap)) * scale;
      d_return[w] -= push;
      d_return[l] += push;
    }
    Eigen::MatrixXd out_grad(1, offset.back());
    for (std::size_t k = 0; k < used.size(); ++k)
      out_grad.middleCols(offset[k], offset[k + 1] - offset[k]).setConstant(d_return[k]);
    return out_grad;
  });

  for (int id : used) slot[id] = -1;
  return loss;
}

std::vector<Eigen::MatrixXd> encode_pool(const std::vector<Trajectory>& pool) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(pool.size());
  for (const auto& t : pool) out.push_back(encode_trajectory(t));
  return out;
}

}  // namespace

std::vector<double> bt_loss_gradient(const RewardModel& m, const PairDataset& data) {
  if (data.empty()) throw Error("gradient of an empty dataset");
  data.validate();
  const auto encoded = encode_pool(data.pool);
  std::vector<int> slot(data.pool.size(), -1);
  std::vector<double> grad;
  batch_gradient(m, encoded, data.pairs, 1.0, grad, slot);
  return grad;
}

TrainReport train(RewardModel& m, const PairDataset& data, const TrainConfig& cfg) {
  if (data.empty()) throw Error("cannot train on an empty dataset");
  if (cfg.epochs < 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0))
    throw Error("invalid reward-model training configuration");
  data.validate();

  const auto encoded = encode_pool(data.pool);
  const double n = static_cast<double>(data.size());
  TrainReport report;
  report.initial_loss = bt_loss(m, data) / n;
  report.final_loss = report.initial_loss;

  Adam adam(m.network().parameter_count(), cfg.learning_rate);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> slot(data.pool.size(), -1);
  std::vector<IndexPair> batch;
  std::vector<double> grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) batch.push_back(data.pairs[order[k]]);
      const double loss = batch_gradient(m, encoded, batch, 1.0 / static_cast<double>(batch.size()), grad, slot);
      if (!std::isfinite(loss))
        throw DivergenceError("reward-model loss became non-finite in epoch " + std::to_string(epoch));
      adam.step(m.network().parameters(), grad);
    }
    const double epoch_loss = bt_loss(m, data) / n;
    if (!std::isfinite(epoch_loss))
      throw DivergenceError("reward-model loss became non-finite after epoch " + std::to_string(epoch));
    report.epoch_losses.push_back(epoch_loss);
    report.final_loss = epoch_loss;
  }
  return report;
}

double gradient_check(const RewardModel& m, const PairDataset& data, double h, std::size_t samples,
                      std::uint64_t seed) {
  const auto analytic = bt_loss_gradient(m, data);
  std::vector<std::size_t> indices(analytic.size());
  std::iota(indices.begin(), indices.end(), 0);
  if (samples > 0 && samples < indices.size()) {
    Rng rng(seed);
    std::shuffle(indices.begin(), indices.end(), rng);
    indices.resize(samples);
    std::sort(indices.begin(), indices.end());
  }
  RewardModel probe = m;
  auto params = probe.network().parameters();
  double worst = 0.0;
  for (std::size_t i : indices) {
    const double original = params[i];
    params[i] = original + h;
    const double up = bt_loss(probe, data);
    params[i] = original - h;
    const double down = bt_loss(probe, data);
    params[i] = original;
    const double numeric = (up - down) / (2.0 * h);
    // Floor keeps parameters with vanishing gradient from dividing round-off by zero.
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

}  // namespace arl
