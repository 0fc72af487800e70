#include "arl/kernels/mlp_gradient.hpp"

#include "arl/error.hpp"

namespace arl::kernels {

namespace {

void check_input(const Mlp& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_width()) throw Error("input width mismatch");
}

void check_output_grads(const Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& output_grads) {
  if (output_grads.rows() != net.output_width() || output_grads.cols() != inputs.cols())
    throw Error("output gradient shape mismatch");
}

// Layer activations of one block, input first, network output last.
std::vector<Eigen::MatrixXd> forward_cached(const Mlp& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  const int layers = net.layer_count();
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(layers + 1);
  activations.emplace_back(inputs);
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = net.weight(l) * activations.back();
    z.colwise() += net.bias(l);
    if (l + 1 < layers) apply_activation(net.architecture().hidden, z);
    activations.push_back(std::move(z));
  }
  return activations;
}

// Adds the gradient for one block of samples into `grad`.
void backward(const Mlp& net, const std::vector<Eigen::MatrixXd>& activations,
              const Eigen::Ref<const Eigen::MatrixXd>& output_grads, std::span<double> grad) {
  const auto& arch = net.architecture();
  Eigen::MatrixXd delta = output_grads;
  for (int l = net.layer_count() - 1; l >= 0; --l) {
    Eigen::Map<Eigen::MatrixXd> dw(grad.data() + net.weight_offset(l), arch.layers[l + 1], arch.layers[l]);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + net.bias_offset(l), arch.layers[l + 1]);
    // Products go through aligned temporaries: Eigen picks its summation order from the
    // destination's alignment, and `grad` can sit at any 8-byte boundary.
    const Eigen::MatrixXd w_step = delta * activations[l].transpose();
    const Eigen::VectorXd b_step = delta.rowwise().sum();
    dw += w_step;
    db += b_step;
    if (l > 0) {
      Eigen::MatrixXd back = net.weight(l).transpose() * delta;
      delta = back.cwiseProduct(activation_derivative(arch.hidden, activations[l]));
    }
  }
}

Eigen::Index chunk_count(Eigen::Index cols) { return (cols + kGradientChunk - 1) / kGradientChunk; }
Eigen::Index chunk_begin(Eigen::Index c) { return c * kGradientChunk; }
Eigen::Index chunk_width(Eigen::Index c, Eigen::Index cols) {
  return std::min(kGradientChunk, cols - chunk_begin(c));
}

}  // namespace

namespace serial {

std::vector<double> forward_backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                                     const OutputGradient& output_grad) {
  check_input(net, inputs);
  std::vector<double> grad(net.parameter_count(), 0.0);
  const auto activations = forward_cached(net, inputs);
  const Eigen::MatrixXd output_grads = output_grad(activations.back());
  check_output_grads(net, inputs, output_grads);
  if (inputs.cols() > 0) backward(net, activations, output_grads, grad);
  return grad;
}

std::vector<double> parameter_gradient(const Mlp& net, const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& output_grads) {
  check_input(net, inputs);
  check_output_grads(net, inputs, output_grads);
  return forward_backward(net, inputs, [&](const Eigen::MatrixXd&) { return output_grads; });
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& inputs) { return net.forward(inputs); }

}  // namespace serial

namespace parallel {

std::vector<double> forward_backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                                     const OutputGradient& output_grad) {
  check_input(net, inputs);
  const Eigen::Index cols = inputs.cols();
  const Eigen::Index chunks = chunk_count(cols);
  std::vector<std::vector<Eigen::MatrixXd>> cache(static_cast<std::size_t>(chunks));
  Eigen::MatrixXd outputs(net.output_width(), cols);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    auto& acts = cache[static_cast<std::size_t>(c)];
    acts = forward_cached(net, inputs.middleCols(chunk_begin(c), chunk_width(c, cols)));
    outputs.middleCols(chunk_begin(c), chunk_width(c, cols)) = acts.back();
  }

  const Eigen::MatrixXd output_grads = output_grad(outputs);
  check_output_grads(net, inputs, output_grads);

  std::vector<std::vector<double>> partial(static_cast<std::size_t>(chunks),
                                           std::vector<double>(net.parameter_count(), 0.0));
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    backward(net, cache[static_cast<std::size_t>(c)],
             output_grads.middleCols(chunk_begin(c), chunk_width(c, cols)),
             partial[static_cast<std::size_t>(c)]);
  }
  std::vector<double> grad(net.parameter_count(), 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += p[i];
  return grad;
}

std::vector<double> parameter_gradient(const Mlp& net, const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& output_grads) {
  check_input(net, inputs);
  check_output_grads(net, inputs, output_grads);
  return forward_backward(net, inputs, [&](const Eigen::MatrixXd&) { return output_grads; });
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& inputs) {
  check_input(net, inputs);
  const Eigen::Index cols = inputs.cols();
  Eigen::MatrixXd out(net.output_width(), cols);
  const Eigen::Index chunks = chunk_count(cols);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    out.middleCols(chunk_begin(c), chunk_width(c, cols)) =
        forward_cached(net, inputs.middleCols(chunk_begin(c), chunk_width(c, cols))).back();
  }
  return out;
}

}  // namespace parallel

}  // namespace arl::kernels
