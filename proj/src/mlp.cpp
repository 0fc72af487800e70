#include "arl/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "arl/error.hpp"

namespace arl {

std::string_view activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_name(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw Error("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(MlpArchitecture arch, std::uint64_t seed) : arch_(std::move(arch)), seed_(seed) {
  if (arch_.layers.size() < 2) throw Error("an MLP needs at least an input and an output layer");
  for (int w : arch_.layers)
    if (w <= 0) throw Error("layer widths must be positive");
  std::size_t total = 0;
  for (int l = 0; l < layer_count(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(arch_.layers[l + 1]) * (arch_.layers[l] + 1);
  }
  params_.assign(total, 0.0);

  std::mt19937_64 rng(seed);
  for (int l = 0; l < layer_count(); ++l) {
    const double fan_in = arch_.layers[l];
    const double fan_out = arch_.layers[l + 1];
    const bool relu_layer = arch_.hidden == Activation::Relu && l + 1 < layer_count();
    const double limit = relu_layer ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> init(-limit, limit);
    auto w = weight(l);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = init(rng);
  }
}

std::size_t Mlp::bias_offset(int layer) const {
  return offsets_[layer] + static_cast<std::size_t>(arch_.layers[layer + 1]) * arch_.layers[layer];
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + offsets_[layer], arch_.layers[layer + 1], arch_.layers[layer]};
}
Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  return {params_.data() + offsets_[layer], arch_.layers[layer + 1], arch_.layers[layer]};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), arch_.layers[layer + 1]};
}
Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + bias_offset(layer), arch_.layers[layer + 1]};
}

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  if (act == Activation::Tanh)
    // 1 - 2 / (exp(2z) + 1): Eigen vectorises exp for doubles but not tanh.
    z = (1.0 - 2.0 / ((2.0 * z.array().cwiseMin(40.0)).exp() + 1.0)).matrix();
  else
    z = z.cwiseMax(0.0);
}

Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& activated) {
  if (act == Activation::Tanh) return (1.0 - activated.array().square()).matrix();
  return (activated.array() > 0.0).cast<double>().matrix();
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_width()) throw Error("input width mismatch");
  Eigen::MatrixXd a = inputs;
  for (int l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < layer_count()) apply_activation(arch_.hidden, z);
    a = std::move(z);
  }
  return a;
}

void Mlp::zero_output_layer() {
  const int last = layer_count() - 1;
  weight(last).setZero();
  bias(last).setZero();
}

nlohmann::json Mlp::to_json() const {
  return {{"layers", arch_.layers},
          {"activation", std::string(activation_name(arch_.hidden))},
          {"seed", seed_},
          {"parameters", std::vector<double>(params_.begin(), params_.end())}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp m({j.at("layers").get<std::vector<int>>(),
         activation_from_name(j.at("activation").get<std::string>())},
        j.at("seed").get<std::uint64_t>());
  auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != m.params_.size())
    throw Error("checkpoint parameter count does not match its architecture");
  m.params_.assign(params.begin(), params.end());
  return m;
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw Error("optimiser state does not match parameter count");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::Map<Eigen::ArrayXd> p(params.data(), n);
  Eigen::Map<const Eigen::ArrayXd> g(grads.data(), n);
  Eigen::Map<Eigen::ArrayXd> m(m_.data(), n);
  Eigen::Map<Eigen::ArrayXd> v(v_.data(), n);
  m = beta1_ * m + (1.0 - beta1_) * g;
  v = beta2_ * v + (1.0 - beta2_) * g.square();
  p -= lr_ * (m / c1) / ((v / c2).sqrt() + eps_);
}

}  // namespace arl
