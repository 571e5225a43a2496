#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sdfprox::nsdf {

/// Hidden-layer nonlinearity. Softplus is the working choice (smooth, so the
/// eikonal term stays differentiable); identity exists for linear-net tests.
enum class Activation : std::uint32_t { softplus = 0, identity = 1 };

/// Sharpness of the softplus hidden activation tau(x) = ln(1 + e^(kx)) / k.
inline constexpr double kSoftplusSharpness = 100.0;

/**
 * Fully connected network p in R^3 -> scalar. weights[l] maps layer l to
 * layer l+1; every hidden layer applies the activation, the output layer is
 * affine. Immutable during evaluation; safe to share across threads.
 */
struct MlpParams {
  std::vector<int> layer_dims;  // {3, ..., 1}
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::softplus;

  int layer_count() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
  bool all_finite() const;
};

/// Gradients (or Adam moments) with the same shapes as the parameters.
struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGrads zeros_like(const MlpParams& params);
  void setZero();
};

/// He-normal weights (std = sqrt(2 / fan_in)), zero biases, final bias 0.1
/// so the untrained field is positive (reads as "no obstacle") everywhere.
/// Deterministic per seed.
MlpParams init_mlp(const std::vector<int>& layer_dims, Activation activation,
                   std::uint64_t seed);

double forward(const MlpParams& params, const Eigen::Vector3d& p);

/// Batch evaluation, one sample per column of `points` (3 x N) -> 1 x N.
Eigen::RowVectorXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& points);

/// Exact gradient of forward with respect to p, by the layer-by-layer
/// Jacobian recursion J^(l+1) = diag(tau'(z^l)) W^l J^(l).
Eigen::Vector3d input_gradient(const MlpParams& params, const Eigen::Vector3d& p);

struct ValueAndGradient {
  double value;
  Eigen::Vector3d gradient;
};
ValueAndGradient forward_with_gradient(const MlpParams& params, const Eigen::Vector3d& p);

/// Batched value + gradient: values 1 x N, gradients 3 x N.
struct BatchValueAndGradient {
  Eigen::RowVectorXd values;
  Eigen::MatrixXd gradients;
};
BatchValueAndGradient forward_with_gradient_batch(const MlpParams& params,
                                                  const Eigen::MatrixXd& points);

}  // namespace sdfprox::nsdf
