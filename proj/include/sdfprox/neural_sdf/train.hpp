#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdfprox/geometry/sampling.hpp"
#include "sdfprox/neural_sdf/loss.hpp"
#include "sdfprox/neural_sdf/mlp.hpp"

namespace sdfprox::nsdf {

struct TrainConfig {
  double kappa = 2.0;  // under-estimation penalty ratio, > 1
  double eta = 0.1;    // eikonal weight, > 0
  std::size_t iterations = 10000;
  std::size_t batch_size = 512;
  double lr_initial = 0.005;
  double lr_decay = 0.5;               // multiplier, 0 < decay <= 1
  std::size_t decay_interval = 2000;   // iterations between decays
  std::uint64_t seed = 0;
  ValueLoss loss = ValueLoss::asymmetric;

  void validate() const;
  double learning_rate(std::size_t iteration) const;
};

struct TrainProgress {
  std::size_t iteration;
  double loss_total;
  double loss_value;
  double loss_eikonal;
  double learning_rate;
};
using ProgressFn = std::function<void(const TrainProgress&)>;

/**
 * Adam (beta1 0.9, beta2 0.999, eps 1e-8) over seeded epoch shuffles without
 * replacement; the final short batch of an epoch is used as-is. Single
 * threaded and deterministic per (dataset, arch, config). Throws with the
 * iteration index if the loss turns non-finite.
 */
MlpParams train(const std::vector<geom::SdfSample>& dataset,
                const std::vector<int>& layer_dims, const TrainConfig& config,
                const ProgressFn& progress = {});

/// Same, but continues from explicit initial parameters.
MlpParams train_from(MlpParams params, const std::vector<geom::SdfSample>& dataset,
                     const TrainConfig& config, const ProgressFn& progress = {});

}  // namespace sdfprox::nsdf
