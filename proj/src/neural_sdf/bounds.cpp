#include "sdfprox/neural_sdf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdfprox::nsdf {

ErrorBounds estimate_error_bounds(const MlpParams& params,
                                  const std::vector<Eigen::Vector3d>& eval_points,
                                  const OracleFn& oracle, double gradient_quantile,
                                  double gradient_inflation) {
  if (eval_points.empty()) {
    throw std::invalid_argument("estimate_error_bounds: empty evaluation set");
  }

  Eigen::MatrixXd points(3, static_cast<Eigen::Index>(eval_points.size()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) points.col(i) = eval_points[i];
  const BatchValueAndGradient net = forward_with_gradient_batch(params, points);

  ErrorBounds bounds;
  std::vector<double> grad_errors;
  grad_errors.reserve(eval_points.size());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const OracleEval truth = oracle(eval_points[i]);
    bounds.e_h = std::max(bounds.e_h, net.values(i) - truth.value);
    if (truth.grad_valid) {
      grad_errors.push_back((truth.gradient - net.gradients.col(i)).norm());
    }
  }
  if (grad_errors.empty()) {
    throw std::runtime_error(
        "estimate_error_bounds: no point with a well-defined true gradient");
  }

  // Inverted-CDF empirical quantile: index ceil(q n) - 1 of the sorted errors.
  const double scaled = std::ceil(gradient_quantile * static_cast<double>(grad_errors.size()));
  const auto rank = static_cast<std::ptrdiff_t>(std::clamp(
      scaled - 1.0, 0.0, static_cast<double>(grad_errors.size() - 1)));
  std::nth_element(grad_errors.begin(), grad_errors.begin() + rank, grad_errors.end());
  bounds.e_grad_h = gradient_inflation * grad_errors[rank];
  return bounds;
}

OracleFn oracle_eval_fn(const geom::SdfOracle& oracle) {
  return [&oracle](const Eigen::Vector3d& p) {
    OracleEval out;
    out.value = oracle.signed_distance(p);
    const geom::SdfOracle::Gradient g = oracle.gradient(p);
    out.gradient = g.g;
    out.grad_valid = !g.at_surface && !g.ambiguous;
    return out;
  };
}

OracleFn oracle_eval_fn(const geom::ScalarField& field, double grad_tol) {
  return [&field, grad_tol](const Eigen::Vector3d& p) {
    OracleEval out;
    out.value = field.value(p);
    out.gradient = field.gradient(p);
    out.grad_valid = std::abs(out.gradient.norm() - 1.0) <= grad_tol &&
                     std::abs(out.value) > 1e-9;
    return out;
  };
}

SurfaceMetrics eval_metrics(const MlpParams& params,
                            const std::vector<Eigen::Vector3d>& surface_points) {
  SurfaceMetrics metrics;
  if (surface_points.empty()) {
    metrics.epsilon_plus_empty = true;
    return metrics;
  }
  Eigen::MatrixXd points(3, static_cast<Eigen::Index>(surface_points.size()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) points.col(i) = surface_points[i];
  const Eigen::RowVectorXd values = forward_batch(params, points);

  double abs_sum = 0, pos_sum = 0;
  std::size_t pos_count = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    abs_sum += std::abs(values(i));
    if (values(i) > 0) {
      pos_sum += values(i);
      ++pos_count;
    }
  }
  metrics.epsilon = abs_sum / static_cast<double>(values.size());
  if (pos_count == 0) {
    metrics.epsilon_plus_empty = true;
  } else {
    metrics.epsilon_plus = pos_sum / static_cast<double>(pos_count);
  }
  return metrics;
}

}  // namespace sdfprox::nsdf
