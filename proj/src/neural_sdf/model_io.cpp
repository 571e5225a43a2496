#include "sdfprox/neural_sdf/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "sdfprox/common/io_util.hpp"

namespace sdfprox::nsdf {

namespace {

constexpr char kMagic[4] = {'N', 'S', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json train_config_json(const TrainConfig& c) {
  return {{"kappa", c.kappa},
          {"eta", c.eta},
          {"iterations", c.iterations},
          {"batch_size", c.batch_size},
          {"lr_initial", c.lr_initial},
          {"lr_decay", c.lr_decay},
          {"decay_interval", c.decay_interval},
          {"seed", c.seed},
          {"loss", c.loss == ValueLoss::asymmetric ? "asymmetric" : "paper-literal"}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.kappa = j.at("kappa").get<double>();
  c.eta = j.at("eta").get<double>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.lr_initial = j.at("lr_initial").get<double>();
  c.lr_decay = j.at("lr_decay").get<double>();
  c.decay_interval = j.at("decay_interval").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.loss = j.value("loss", "asymmetric") == std::string("paper-literal")
               ? ValueLoss::paper_literal
               : ValueLoss::asymmetric;
  return c;
}

}  // namespace

std::string model_info_json(const ModelInfo& info) {
  nlohmann::json j;
  if (info.train_config) j["train_config"] = train_config_json(*info.train_config);
  if (info.bounds) {
    j["error_bounds"] = {{"e_h", info.bounds->e_h}, {"e_grad_h", info.bounds->e_grad_h}};
  }
  if (info.metrics) {
    j["metrics"] = {{"epsilon", info.metrics->epsilon},
                    {"epsilon_plus", info.metrics->epsilon_plus},
                    {"epsilon_plus_empty", info.metrics->epsilon_plus_empty}};
  }
  if (!info.dataset_hash.empty()) j["dataset_hash"] = info.dataset_hash;
  if (!info.target.empty()) j["target"] = info.target;
  return j.dump(2) + "\n";
}

ModelInfo parse_model_info(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  ModelInfo info;
  if (j.contains("train_config")) info.train_config = train_config_from_json(j["train_config"]);
  if (j.contains("error_bounds")) {
    ErrorBounds b;
    b.e_h = j["error_bounds"].at("e_h").get<double>();
    b.e_grad_h = j["error_bounds"].at("e_grad_h").get<double>();
    info.bounds = b;
  }
  if (j.contains("metrics")) {
    SurfaceMetrics m;
    m.epsilon = j["metrics"].at("epsilon").get<double>();
    m.epsilon_plus = j["metrics"].at("epsilon_plus").get<double>();
    m.epsilon_plus_empty = j["metrics"].value("epsilon_plus_empty", false);
    info.metrics = m;
  }
  info.dataset_hash = j.value("dataset_hash", "");
  info.target = j.value("target", "");
  return info;
}

void save_model(const std::string& path, const MlpParams& params, const ModelInfo& info) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(params.activation));
  write_u32(os, static_cast<std::uint32_t>(params.layer_dims.size()));
  for (const int d : params.layer_dims) write_u32(os, static_cast<std::uint32_t>(d));
  for (int l = 0; l < params.layer_count(); ++l) {
    const Eigen::MatrixXd& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) write_f64(os, w(r, c));
    }
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i) {
      write_f64(os, params.biases[l](i));
    }
  }
  if (!os) throw std::runtime_error("save_model: write failed for " + path);
  os.close();
  write_text_file(path + ".meta.json", model_info_json(info));
}

LoadedModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw std::runtime_error("load_model: bad magic in " + path);
  }
  const std::uint32_t version = read_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("load_model: unsupported version " + std::to_string(version));
  }
  LoadedModel out;
  const std::uint32_t act = read_u32(is);
  if (act > 1) throw std::runtime_error("load_model: unknown activation tag");
  out.params.activation = static_cast<Activation>(act);
  const std::uint32_t n_dims = read_u32(is);
  if (n_dims < 2 || n_dims > 64) throw std::runtime_error("load_model: bad layer count");
  out.params.layer_dims.resize(n_dims);
  for (auto& d : out.params.layer_dims) d = static_cast<int>(read_u32(is));
  for (std::size_t l = 0; l + 1 < out.params.layer_dims.size(); ++l) {
    const int rows = out.params.layer_dims[l + 1], cols = out.params.layer_dims[l];
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) w(r, c) = read_f64(is);
    }
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) b(i) = read_f64(is);
    out.params.weights.push_back(std::move(w));
    out.params.biases.push_back(std::move(b));
  }
  if (!is) throw std::runtime_error("load_model: truncated file " + path);
  if (!out.params.all_finite()) {
    throw std::runtime_error("load_model: non-finite parameters in " + path);
  }

  std::ifstream sidecar(path + ".meta.json");
  if (sidecar) {
    out.info = parse_model_info(read_text_file(path + ".meta.json"));
  }
  return out;
}

}  // namespace sdfprox::nsdf
