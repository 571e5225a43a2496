#pragma once

#include <optional>
#include <string>

#include "sdfprox/neural_sdf/bounds.hpp"
#include "sdfprox/neural_sdf/mlp.hpp"
#include "sdfprox/neural_sdf/train.hpp"

namespace sdfprox::nsdf {

/// Descriptive record stored next to the weights: how the model was made
/// and what was certified about it.
struct ModelInfo {
  std::optional<TrainConfig> train_config;
  std::optional<ErrorBounds> bounds;
  std::optional<SurfaceMetrics> metrics;
  std::string dataset_hash;  // hex fingerprint of the training set, if known
  std::string target;        // mesh path or analytic tag
};

// Weight file: little-endian binary {magic "NSDF", version u32 = 1,
// activation u32, layer count u32, layer dims i32..., then per layer the
// row-major weight block and the bias block as f64}. A JSON sidecar
// "<path>.meta.json" carries ModelInfo.

void save_model(const std::string& path, const MlpParams& params,
                const ModelInfo& info = {});

struct LoadedModel {
  MlpParams params;
  ModelInfo info;  // empty-default when no sidecar is present
};
LoadedModel load_model(const std::string& path);

std::string model_info_json(const ModelInfo& info);
ModelInfo parse_model_info(const std::string& json_text);

}  // namespace sdfprox::nsdf
