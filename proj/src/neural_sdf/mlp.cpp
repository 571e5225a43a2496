#include "sdfprox/neural_sdf/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "sdfprox/common/rng.hpp"

namespace sdfprox::nsdf {

namespace {

double softplus(double x) {
  const double k = kSoftplusSharpness;
  return std::max(x, 0.0) + std::log1p(std::exp(-k * std::abs(x))) / k;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  if (act == Activation::identity) return;
  z = z.unaryExpr([](double x) { return softplus(x); });
}

Eigen::MatrixXd activation_slope(Activation act, const Eigen::MatrixXd& z) {
  if (act == Activation::identity) return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  return z.unaryExpr([](double x) { return sigmoid(kSoftplusSharpness * x); });
}

void check_finite(const Eigen::MatrixXd& m, int layer, const char* what) {
  if (!m.allFinite()) {
    throw std::runtime_error(std::string("mlp: non-finite ") + what + " at layer " +
                             std::to_string(layer));
  }
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < layer_count(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
  }
  return n;
}

bool MlpParams::all_finite() const {
  for (int l = 0; l < layer_count(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads g;
  g.weights.reserve(params.weights.size());
  g.biases.reserve(params.biases.size());
  for (int l = 0; l < params.layer_count(); ++l) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(params.weights[l].rows(),
                                                 params.weights[l].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }
  return g;
}

void MlpGrads::setZero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

MlpParams init_mlp(const std::vector<int>& layer_dims, Activation activation,
                   std::uint64_t seed) {
  if (layer_dims.size() < 2 || layer_dims.front() != 3 || layer_dims.back() != 1) {
    throw std::invalid_argument("init_mlp: layer_dims must chain from 3 to 1");
  }
  for (const int d : layer_dims) {
    if (d < 1) throw std::invalid_argument("init_mlp: non-positive layer width");
  }

  MlpParams params;
  params.layer_dims = layer_dims;
  params.activation = activation;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int rows = layer_dims[l + 1], cols = layer_dims[l];
    Eigen::MatrixXd w(rows, cols);
    const double std_dev = std::sqrt(2.0 / cols);
    for (int r = 0; r < rows; ++r) {  // row-major fill pins the draw order
      for (int c = 0; c < cols; ++c) w(r, c) = std_dev * rng.normal();
    }
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(Eigen::VectorXd::Zero(rows));
  }
  params.biases.back()(0) = 0.1;
  return params;
}

Eigen::RowVectorXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& points) {
  const int last = params.layer_count() - 1;
  Eigen::MatrixXd y = points;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd z =
        (params.weights[l] * y).colwise() + params.biases[l];
    if (l < last) apply_activation(params.activation, z);
    check_finite(z, l, "value");
    y = std::move(z);
  }
  return y.row(0);
}

double forward(const MlpParams& params, const Eigen::Vector3d& p) {
  return forward_batch(params, p)(0);
}

BatchValueAndGradient forward_with_gradient_batch(const MlpParams& params,
                                                  const Eigen::MatrixXd& points) {
  const int last = params.layer_count() - 1;
  const Eigen::Index n = points.cols();

  Eigen::MatrixXd y = points;
  // Per-sample Jacobian d y / d p, stored as one matrix per input axis.
  std::array<Eigen::MatrixXd, 3> jac;
  for (int a = 0; a < 3; ++a) {
    jac[a] = Eigen::MatrixXd::Zero(3, n);
    jac[a].row(a).setOnes();
  }

  for (int l = 0; l < last; ++l) {
    const Eigen::MatrixXd z =
        (params.weights[l] * y).colwise() + params.biases[l];
    const Eigen::MatrixXd slope = activation_slope(params.activation, z);
    for (int a = 0; a < 3; ++a) {
      jac[a] = slope.cwiseProduct(params.weights[l] * jac[a]);
    }
    Eigen::MatrixXd act = z;
    apply_activation(params.activation, act);
    check_finite(act, l, "value");
    y = std::move(act);
  }

  BatchValueAndGradient out;
  out.values = ((params.weights[last] * y).colwise() + params.biases[last]).row(0);
  check_finite(out.values, last, "value");
  out.gradients.resize(3, n);
  for (int a = 0; a < 3; ++a) {
    out.gradients.row(a) = params.weights[last] * jac[a];
  }
  check_finite(out.gradients, last, "gradient");
  return out;
}

Eigen::Vector3d input_gradient(const MlpParams& params, const Eigen::Vector3d& p) {
  return forward_with_gradient_batch(params, p).gradients.col(0);
}

ValueAndGradient forward_with_gradient(const MlpParams& params, const Eigen::Vector3d& p) {
  const BatchValueAndGradient b = forward_with_gradient_batch(params, p);
  return {b.values(0), b.gradients.col(0)};
}

}  // namespace sdfprox::nsdf
