#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "arl/mlp.hpp"
#include "arl/trajectory.hpp"

namespace arl {

/// Learned per-step reward r(s, a): (x, y, one-hot action) -> 64 -> 64 -> 1, tanh hidden units.
class RewardModel {
 public:
  static constexpr int kInputWidth = 6;
  static constexpr int kHidden = 64;

  RewardModel() : RewardModel(0) {}
  explicit RewardModel(std::uint64_t seed);
  explicit RewardModel(Mlp net);

  double predict(const State& s, Action a) const;
  const Mlp& network() const { return net_; }
  Mlp& network() { return net_; }

  nlohmann::json to_json() const { return net_.to_json(); }
  static RewardModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RewardModel load(const std::filesystem::path& path);

 private:
  Mlp net_;
};

/// Writes the network input for (s, a) into column `col` of `inputs`.
void encode_input(const State& s, Action a, Eigen::MatrixXd& inputs, Eigen::Index col);
Eigen::MatrixXd encode_trajectory(const Trajectory& t);

/// Undiscounted sum of predicted rewards over the trajectory's (s, a) pairs.
double model_return(const RewardModel& m, const Trajectory& t);

/// Bradley-Terry probability that the first return is preferred, from the return gap.
double preference_probability(double return_gap);

/// -log P(winner preferred) for the gap R_winner - R_loser, without overflow.
double pair_loss(double return_gap);

/// P(t1 preferred to t2) = exp(R1) / (exp(R1) + exp(R2)).
double pair_probability(const RewardModel& m, const Trajectory& t1, const Trajectory& t2);

struct IndexPair {
  int winner = 0;
  int loser = 0;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

/// Preference pairs over a shared trajectory pool.
struct PairDataset {
  std::vector<Trajectory> pool;
  std::vector<IndexPair> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  /// Throws on degenerate (winner == loser) or out-of-range pairs.
  void validate() const;
};

struct DatasetSplit {
  PairDataset train;
  PairDataset test;
};

/// Uniformly random split; the test side gets round(test_fraction * size) pairs.
DatasetSplit split_dataset(const PairDataset& data, double test_fraction, std::uint64_t seed);

/// Negative log-likelihood summed over pairs. Throws on an empty dataset.
double bt_loss(const RewardModel& m, const PairDataset& data);

/// Fraction of pairs whose winner gets probability > 0.5; exact ties count one half.
double mppa(const RewardModel& m, const PairDataset& data);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 200;
  int batch_size = 32;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainReport {
  double initial_loss = 0.0;  // mean per-pair loss before training
  double final_loss = 0.0;
  std::vector<double> epoch_losses;  // mean per-pair loss after each epoch
};

/// Mini-batch Adam on the Bradley-Terry loss. Warm-starts from the given model.
/// Throws DivergenceError on a non-finite loss.
TrainReport train(RewardModel& m, const PairDataset& data, const TrainConfig& cfg);

/// Analytic gradient of bt_loss with respect to every parameter.
std::vector<double> bt_loss_gradient(const RewardModel& m, const PairDataset& data);

/// Largest relative error between the analytic gradient and central differences with
/// step `h`, over `samples` parameters drawn with `seed` (all parameters when samples == 0).
double gradient_check(const RewardModel& m, const PairDataset& data, double h = 1e-5,
                      std::size_t samples = 0, std::uint64_t seed = 0);

}  // namespace arl
