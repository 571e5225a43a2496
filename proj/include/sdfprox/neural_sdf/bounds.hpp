#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "sdfprox/geometry/fields.hpp"
#include "sdfprox/geometry/sdf_oracle.hpp"
#include "sdfprox/neural_sdf/mlp.hpp"

namespace sdfprox::nsdf {

/// Certified worst-case errors of the learned field over an evaluation set:
/// e_h bounds how far the network over-estimates clearance (network minus
/// truth, positive part), e_grad_h bounds the gradient error norm.
struct ErrorBounds {
  double e_h = 0;
  double e_grad_h = 0;
};

/// Ground-truth value and gradient at one evaluation point. grad_valid is
/// false where the true distance field is not differentiable (on the surface
/// or near the medial axis); such points are skipped for the gradient bound.
struct OracleEval {
  double value = 0;
  Eigen::Vector3d gradient{0, 0, 0};
  bool grad_valid = true;
};
using OracleFn = std::function<OracleEval(const Eigen::Vector3d&)>;

/**
 * e_h = max over points of max(0, network - truth): by construction
 * network - e_h <= truth on every evaluated point, so subtracting e_h makes
 * the field a certified under-approximation there. e_grad_h is the
 * `gradient_quantile` of the gradient error norms over the points with a
 * well-defined true gradient, inflated by `gradient_inflation` (empirical,
 * not a formal bound). Throws if no point has a usable gradient.
 */
ErrorBounds estimate_error_bounds(const MlpParams& params,
                                  const std::vector<Eigen::Vector3d>& eval_points,
                                  const OracleFn& oracle,
                                  double gradient_quantile = 0.999,
                                  double gradient_inflation = 1.1);

/// Mesh-oracle adapter (gradient invalid at surface/ambiguous points).
OracleFn oracle_eval_fn(const geom::SdfOracle& oracle);

/// Analytic-field adapter; `grad_tol` marks points whose field gradient is
/// not unit norm (ridges of a union / box) as invalid.
OracleFn oracle_eval_fn(const geom::ScalarField& field, double grad_tol = 1e-6);

struct SurfaceMetrics {
  double epsilon = 0;       // mean |network| on true-surface points
  double epsilon_plus = 0;  // mean of strictly positive network values
  bool epsilon_plus_empty = false;  // no positive values at all
};

/// Approximation metrics over points sampled on the true surface.
SurfaceMetrics eval_metrics(const MlpParams& params,
                            const std::vector<Eigen::Vector3d>& surface_points);

}  // namespace sdfprox::nsdf
