#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arl/mlp.hpp"

// Backpropagation of per-sample output gradients to a flat parameter gradient:
// grad = sum over columns k of output_grads(:, k)^T * d net(inputs(:, k)) / d params.
namespace arl::kernels {

/// Samples per work unit in the parallel kernel. Fixed so the reduction order,
/// and hence the floating-point result, does not depend on the thread count.
inline constexpr Eigen::Index kGradientChunk = 256;

/// Maps the network outputs of a batch to the loss gradient with respect to those outputs.
using OutputGradient = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& outputs)>;

namespace serial {
/// One forward pass, then backpropagation of output_grad(outputs).
std::vector<double> forward_backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                                     const OutputGradient& output_grad);
std::vector<double> parameter_gradient(const Mlp& net, const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& output_grads);
/// Forward pass over all columns.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& inputs);
}  // namespace serial

namespace parallel {
std::vector<double> forward_backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                                     const OutputGradient& output_grad);
std::vector<double> parameter_gradient(const Mlp& net, const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& output_grads);
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& inputs);
}  // namespace parallel

}  // namespace arl::kernels
