#pragma once

#include <vector>

#include "sdfprox/geometry/sampling.hpp"
#include "sdfprox/neural_sdf/mlp.hpp"

namespace sdfprox::nsdf {

/**
 * Value-loss convention.
 *
 * `asymmetric` (default): mean of  max(e, 0) + kappa * max(-e, 0)  with
 * e = prediction - target, so under-estimation (e < 0, field reads closer
 * than truth... i.e. smaller) is penalized kappa times harder and the
 * trained field settles on the over-estimating side.
 *
 * `paper_literal`: (kappa - 1) * max(e, 0) averaged over the batch. This
 * penalizes only over-estimation and leaves under-estimation gradient-free;
 * it is kept selectable for comparison runs.
 */
enum class ValueLoss { asymmetric = 0, paper_literal = 1 };

struct LossBreakdown {
  double total = 0;
  double value_term = 0;    // asymmetric (or literal) distance-error term
  double eikonal_term = 0;  // mean (|grad| - 1)^2, before the eta weight
};

/**
 * Loss and exact parameter gradients on a batch.
 *
 * total = value_term + eta * eikonal_term. The gradient includes the path
 * through the input-gradient recursion (the eikonal term differentiates the
 * network Jacobian, so its weight gradient carries second-order terms);
 * everything is hand-derived for this architecture, no autodiff.
 */
LossBreakdown parameter_gradients(const MlpParams& params,
                                  const std::vector<geom::SdfSample>& batch,
                                  double kappa, double eta, MlpGrads& grads,
                                  ValueLoss loss = ValueLoss::asymmetric);

/// Loss only (shared code path with parameter_gradients, gradients skipped).
LossBreakdown evaluate_loss(const MlpParams& params,
                            const std::vector<geom::SdfSample>& batch, double kappa,
                            double eta, ValueLoss loss = ValueLoss::asymmetric);

}  // namespace sdfprox::nsdf
