#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace arl {

enum class Activation { Tanh, Relu };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

struct MlpArchitecture {
  std::vector<int> layers;  // widths, input first
  Activation hidden = Activation::Tanh;

  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

/// Fully-connected network with a linear output layer. Parameters live in one
/// flat buffer (per layer: column-major weight matrix, then bias) so optimisers,
/// checkpoints and finite-difference checks can treat them uniformly.
class Mlp {
 public:
  Mlp() = default;
  /// Glorot-uniform weights (He-uniform for ReLU), zero biases.
  Mlp(MlpArchitecture arch, std::uint64_t seed);

  const MlpArchitecture& architecture() const { return arch_; }
  std::uint64_t seed() const { return seed_; }
  int layer_count() const { return static_cast<int>(arch_.layers.size()) - 1; }
  int input_width() const { return arch_.layers.front(); }
  int output_width() const { return arch_.layers.back(); }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  /// Offset of a layer's weight block in the flat parameter buffer.
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const;

  /// Columns of `inputs` are samples. Returns output_width x samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;

  void zero_output_layer();

  /// {"layers":[...], "activation":name, "seed":n, "parameters":[...]}
  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  MlpArchitecture arch_;
  std::uint64_t seed_ = 0;
  // Aligned so Eigen's vectorised kernels take the same path, and round the same way,
  // whichever allocation backs the parameters.
  std::vector<double, Eigen::aligned_allocator<double>> params_;
  std::vector<std::size_t> offsets_;
};

/// Hidden activation applied in place.
void apply_activation(Activation act, Eigen::MatrixXd& z);

/// Derivative of the activation expressed through its output.
Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& activated);

/// Adaptive-moment optimiser over a flat parameter buffer.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  void step(std::span<double> params, std::span<const double> grads);
  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace arl
