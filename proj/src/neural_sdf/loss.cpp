#include "sdfprox/neural_sdf/loss.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace sdfprox::nsdf {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// tau'(z) and tau''(z) for the sharpened softplus (identity: 1 and 0).
void activation_slopes(Activation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& slope,
                       Eigen::MatrixXd& curvature) {
  if (act == Activation::identity) {
    slope = Eigen::MatrixXd::Ones(z.rows(), z.cols());
    curvature = Eigen::MatrixXd::Zero(z.rows(), z.cols());
    return;
  }
  slope = z.unaryExpr([](double x) { return sigmoid(kSoftplusSharpness * x); });
  curvature = kSoftplusSharpness * slope.array() * (1.0 - slope.array());
}

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  if (act == Activation::identity) return;
  const double k = kSoftplusSharpness;
  z = z.unaryExpr([k](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-k * std::abs(x))) / k;
  });
}

LossBreakdown run(const MlpParams& params, const std::vector<geom::SdfSample>& batch,
                  double kappa, double eta, MlpGrads* grads, ValueLoss loss_kind) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  const int last = params.layer_count() - 1;
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());

  Eigen::MatrixXd points(3, n);
  Eigen::RowVectorXd targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    points.col(i) = batch[i].p;
    targets(i) = batch[i].d;
  }

  // Forward pass, keeping everything the backward pass revisits: layer
  // inputs y, activation slopes/curvatures, pre-activation Jacobians m and
  // activated Jacobians j (one matrix per input axis).
  std::vector<Eigen::MatrixXd> ys(last + 1);
  std::vector<Eigen::MatrixXd> slopes(last), curvatures(last);
  std::vector<std::array<Eigen::MatrixXd, 3>> ms(last), js(last + 1);

  ys[0] = points;
  for (int a = 0; a < 3; ++a) {
    js[0][a] = Eigen::MatrixXd::Zero(3, n);
    js[0][a].row(a).setOnes();
  }
  for (int l = 0; l < last; ++l) {
    Eigen::MatrixXd z = (params.weights[l] * ys[l]).colwise() + params.biases[l];
    activation_slopes(params.activation, z, slopes[l], curvatures[l]);
    for (int a = 0; a < 3; ++a) {
      ms[l][a] = params.weights[l] * js[l][a];
      js[l + 1][a] = slopes[l].cwiseProduct(ms[l][a]);
    }
    apply_activation(params.activation, z);
    ys[l + 1] = std::move(z);
  }
  const Eigen::RowVectorXd values =
      ((params.weights[last] * ys[last]).colwise() + params.biases[last]).row(0);
  std::array<Eigen::RowVectorXd, 3> grad_rows;
  for (int a = 0; a < 3; ++a) grad_rows[a] = params.weights[last] * js[last][a];

  // Loss terms and their derivatives w.r.t. values and gradient rows.
  const Eigen::RowVectorXd errors = values - targets;
  const Eigen::RowVectorXd grad_norms =
      (grad_rows[0].array().square() + grad_rows[1].array().square() +
       grad_rows[2].array().square())
          .sqrt();

  LossBreakdown out;
  Eigen::RowVectorXd value_bar(n);
  Eigen::RowVectorXd norm_bar(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double value_sum = 0, eikonal_sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = errors(i);
    if (loss_kind == ValueLoss::asymmetric) {
      value_sum += e > 0 ? e : -kappa * e;
      value_bar(i) = (e > 0 ? 1.0 : (e < 0 ? -kappa : 0.0)) * inv_n;
    } else {
      value_sum += (kappa - 1.0) * std::max(e, 0.0);
      value_bar(i) = (e > 0 ? kappa - 1.0 : 0.0) * inv_n;
    }
    const double r = grad_norms(i) - 1.0;
    eikonal_sum += r * r;
    norm_bar(i) = 2.0 * r * eta * inv_n;
  }
  out.value_term = value_sum / static_cast<double>(n);
  out.eikonal_term = eikonal_sum / static_cast<double>(n);
  out.total = out.value_term + eta * out.eikonal_term;
  if (!std::isfinite(out.total)) throw std::runtime_error("loss: non-finite value");
  if (grads == nullptr) return out;

  std::array<Eigen::RowVectorXd, 3> grad_bar;
  for (int a = 0; a < 3; ++a) {
    grad_bar[a].resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      grad_bar[a](i) =
          grad_norms(i) > 0 ? norm_bar(i) * grad_rows[a](i) / grad_norms(i) : 0.0;
    }
  }

  // Backward pass. y_bar/j_bar are adjoints of the layer inputs and their
  // Jacobians; each hidden layer also routes curvature through the slope
  // (the second-order path: z moves both tau(z) and tau'(z)).
  grads->weights[last] = value_bar * ys[last].transpose();
  for (int a = 0; a < 3; ++a) {
    grads->weights[last] += grad_bar[a] * js[last][a].transpose();
  }
  grads->biases[last](0) = value_bar.sum();
  Eigen::MatrixXd y_bar = params.weights[last].transpose() * value_bar;
  std::array<Eigen::MatrixXd, 3> j_bar;
  for (int a = 0; a < 3; ++a) {
    j_bar[a] = params.weights[last].transpose() * grad_bar[a];
  }

  for (int l = last - 1; l >= 0; --l) {
    Eigen::MatrixXd slope_bar = Eigen::MatrixXd::Zero(slopes[l].rows(), n);
    std::array<Eigen::MatrixXd, 3> m_bar;
    for (int a = 0; a < 3; ++a) {
      slope_bar += j_bar[a].cwiseProduct(ms[l][a]);
      m_bar[a] = slopes[l].cwiseProduct(j_bar[a]);
    }
    const Eigen::MatrixXd z_bar =
        y_bar.cwiseProduct(slopes[l]) + slope_bar.cwiseProduct(curvatures[l]);

    grads->weights[l] = z_bar * ys[l].transpose();
    for (int a = 0; a < 3; ++a) {
      grads->weights[l] += m_bar[a] * js[l][a].transpose();
    }
    grads->biases[l] = z_bar.rowwise().sum();

    if (l > 0) {
      y_bar = params.weights[l].transpose() * z_bar;
      for (int a = 0; a < 3; ++a) {
        j_bar[a] = params.weights[l].transpose() * m_bar[a];
      }
    }
  }
  return out;
}

}  // namespace

LossBreakdown parameter_gradients(const MlpParams& params,
                                  const std::vector<geom::SdfSample>& batch,
                                  double kappa, double eta, MlpGrads& grads,
                                  ValueLoss loss) {
  return run(params, batch, kappa, eta, &grads, loss);
}

LossBreakdown evaluate_loss(const MlpParams& params,
                            const std::vector<geom::SdfSample>& batch, double kappa,
                            double eta, ValueLoss loss) {
  return run(params, batch, kappa, eta, nullptr, loss);
}

}  // namespace sdfprox::nsdf
