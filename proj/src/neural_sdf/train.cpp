#include "sdfprox/neural_sdf/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sdfprox/common/rng.hpp"

namespace sdfprox::nsdf {

void TrainConfig::validate() const {
  if (!(kappa > 1.0)) throw std::invalid_argument("train: kappa must be > 1");
  if (!(eta > 0.0)) throw std::invalid_argument("train: eta must be > 0");
  if (!(lr_initial > 0.0)) throw std::invalid_argument("train: lr_initial must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw std::invalid_argument("train: lr_decay must be in (0, 1]");
  }
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
  if (decay_interval == 0) throw std::invalid_argument("train: decay_interval must be >= 1");
}

double TrainConfig::learning_rate(std::size_t iteration) const {
  return lr_initial * std::pow(lr_decay, static_cast<double>(iteration / decay_interval));
}

MlpParams train_from(MlpParams params, const std::vector<geom::SdfSample>& dataset,
                     const TrainConfig& config, const ProgressFn& progress) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  MlpGrads grads = MlpGrads::zeros_like(params);
  MlpGrads m = MlpGrads::zeros_like(params);
  MlpGrads v = MlpGrads::zeros_like(params);

  Rng rng(config.seed ^ 0x7261696e5f726e67ULL);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();  // forces a shuffle before the first batch

  std::vector<geom::SdfSample> batch;
  batch.reserve(std::min(config.batch_size, dataset.size()));

  double beta1_t = 1.0, beta2_t = 1.0;
  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    if (cursor >= order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    batch.clear();
    const std::size_t take = std::min(config.batch_size, order.size() - cursor);
    for (std::size_t i = 0; i < take; ++i) batch.push_back(dataset[order[cursor + i]]);
    cursor += take;

    LossBreakdown loss;
    try {
      loss = parameter_gradients(params, batch, config.kappa, config.eta, grads,
                                 config.loss);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("train: diverged at iteration " + std::to_string(iter) +
                               ": " + e.what());
    }

    const double lr = config.learning_rate(iter);
    beta1_t *= kBeta1;
    beta2_t *= kBeta2;
    const double m_corr = 1.0 - beta1_t, v_corr = 1.0 - beta2_t;
    for (int l = 0; l < params.layer_count(); ++l) {
      m.weights[l] = kBeta1 * m.weights[l] + (1.0 - kBeta1) * grads.weights[l];
      v.weights[l].array() =
          kBeta2 * v.weights[l].array() + (1.0 - kBeta2) * grads.weights[l].array().square();
      params.weights[l].array() -=
          lr * (m.weights[l].array() / m_corr) /
          ((v.weights[l].array() / v_corr).sqrt() + kEps);

      m.biases[l] = kBeta1 * m.biases[l] + (1.0 - kBeta1) * grads.biases[l];
      v.biases[l].array() =
          kBeta2 * v.biases[l].array() + (1.0 - kBeta2) * grads.biases[l].array().square();
      params.biases[l].array() -=
          lr * (m.biases[l].array() / m_corr) /
          ((v.biases[l].array() / v_corr).sqrt() + kEps);
    }
    if (!params.all_finite()) {
      throw std::runtime_error("train: diverged at iteration " + std::to_string(iter) +
                               ": non-finite parameters after update");
    }
    if (progress) {
      progress({iter, loss.total, loss.value_term, loss.eikonal_term, lr});
    }
  }
  return params;
}

MlpParams train(const std::vector<geom::SdfSample>& dataset,
                const std::vector<int>& layer_dims, const TrainConfig& config,
                const ProgressFn& progress) {
  return train_from(init_mlp(layer_dims, Activation::softplus, config.seed), dataset,
                    config, progress);
}

}  // namespace sdfprox::nsdf
