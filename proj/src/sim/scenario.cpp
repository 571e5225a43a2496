#include "sdfprox/sim/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sdfprox/common/io_util.hpp"
#include "sdfprox/geometry/fields.hpp"
#include "sdfprox/geometry/mesh.hpp"
#include "sdfprox/geometry/sdf_oracle.hpp"
#include "sdfprox/neural_sdf/model_io.hpp"

namespace sdfprox::sim {

namespace {

constexpr double kRatioTol = 1e-9;
constexpr double kDefaultAnalyticEh = 0.05;
constexpr double kDefaultAnalyticEgradh = 0.02;

int integer_ratio(double num, double den, const char* what) {
  const double ratio = num / den;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > kRatioTol * std::max(1.0, ratio)) {
    throw std::invalid_argument(std::string("ScenarioConfig: ") + what +
                                " must divide evenly (got ratio " +
                                std::to_string(ratio) + ")");
  }
  return static_cast<int>(rounded);
}

Eigen::Vector3d to_vec3(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 3) {
    throw std::invalid_argument("scenario key '" + key + "' needs 3 numbers, got " +
                                std::to_string(v.size()));
  }
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

Eigen::Matrix3d to_mat3(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 9) {
    throw std::invalid_argument("scenario key '" + key +
                                "' needs 9 numbers (row-major 3x3), got " +
                                std::to_string(v.size()));
  }
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[static_cast<std::size_t>(3 * i + j)];
  return m;
}

std::string vec_string(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_g17(v(i));
  }
  return s + "]";
}

std::string mat_string(const Eigen::MatrixXd& m) {
  Eigen::VectorXd flat(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat(i * m.cols() + j) = m(i, j);
  return vec_string(flat);
}

}  // namespace

int ScenarioConfig::substeps_per_control() const {
  return integer_ratio(control_period, physics_dt, "control_period / physics_dt");
}

int ScenarioConfig::control_steps() const {
  return integer_ratio(horizon, control_period, "horizon / control_period");
}

void ScenarioConfig::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("ScenarioConfig: horizon must be > 0");
  if (!(physics_dt > 0.0)) throw std::invalid_argument("ScenarioConfig: physics_dt must be > 0");
  if (!(control_period >= physics_dt)) {
    throw std::invalid_argument("ScenarioConfig: control_period must be >= physics_dt");
  }
  substeps_per_control();
  control_steps();
  const bool has_analytic = !target.analytic.empty();
  const bool has_model = !target.model_path.empty();
  if (has_analytic == has_model) {
    throw std::invalid_argument(
        "ScenarioConfig: target needs exactly one of an analytic tag or a model path");
  }
  if (!r0.allFinite() || !v0.allFinite() || !r_d.allFinite()) {
    throw std::invalid_argument("ScenarioConfig: non-finite state vector");
  }
  if (!(converge_tol > 0.0)) {
    throw std::invalid_argument("ScenarioConfig: converge_tol must be > 0");
  }
  if (e_h_override && !(*e_h_override >= 0.0)) {
    throw std::invalid_argument("ScenarioConfig: e_h override must be >= 0");
  }
  if (e_grad_h_override && !(*e_grad_h_override >= 0.0)) {
    throw std::invalid_argument("ScenarioConfig: e_grad_h override must be >= 0");
  }
  if (observer.enabled) {
    const Eigen::Index q = observer.A.rows();
    if (q < 1 || observer.A.cols() != q || observer.C.rows() != 3 ||
        observer.C.cols() != q || observer.L.rows() != q || observer.L.cols() != 3) {
      throw std::invalid_argument("ScenarioConfig: observer matrices have inconsistent sizes");
    }
  }
  guidance.validate();
  control.validate();
  orbit.validate();
  chaser.validate();
  disturbance.validate();
}

void MonteCarloParams::validate() const {
  if (n_runs < 1) throw std::invalid_argument("MonteCarloParams: n_runs must be >= 1");
  if (parallelism < 1) throw std::invalid_argument("MonteCarloParams: parallelism must be >= 1");
  if (max_resamples < 0) throw std::invalid_argument("MonteCarloParams: max_resamples must be >= 0");
  for (int i = 0; i < 3; ++i) {
    if (!(box_lo(i) <= box_hi(i))) {
      throw std::invalid_argument("MonteCarloParams: box_lo must be <= box_hi per axis");
    }
  }
}

ScenarioConfig preset_case1(bool with_ci) {
  ScenarioConfig cfg;
  cfg.name = with_ci ? "case1" : "case1_noci";
  cfg.target.analytic = "sphere_panels";
  cfg.r0 = Eigen::Vector3d(0.0, 10.0, 6.0);
  cfg.r_d = Eigen::Vector3d(0.0, -10.0, -4.0);
  cfg.with_ci = with_ci;
  return cfg;
}

ScenarioConfig preset_case2(bool with_observer) {
  ScenarioConfig cfg = preset_case1(true);
  cfg.name = with_observer ? "case2" : "case2_nodo";
  cfg.observer.enabled = with_observer;
  cfg.disturbance = dynamics::DisturbanceModel::make_sinusoid(
      Eigen::Vector3d(0.01, 0.01, 0.01), Eigen::Vector3d(0.02, 0.02, 0.01),
      Eigen::Vector3d(0.0, M_PI / 2.0, 0.0));
  return cfg;
}

ScenarioConfig preset_monte_carlo() {
  ScenarioConfig cfg = preset_case1(true);
  cfg.name = "montecarlo";
  // Goal mirrored above the orbital plane relative to the directed case.
  cfg.r_d = Eigen::Vector3d(0.0, -10.0, 6.0);
  return cfg;
}

MonteCarloParams preset_monte_carlo_params() { return {}; }

ScenarioConfig make_preset(const std::string& name) {
  if (name == "case1") return preset_case1(true);
  if (name == "case1_noci") return preset_case1(false);
  if (name == "case2") return preset_case2(true);
  if (name == "case2_nodo") return preset_case2(false);
  if (name == "montecarlo") return preset_monte_carlo();
  throw std::invalid_argument("unknown preset '" + name +
                              "' (expected case1, case1_noci, case2, case2_nodo, montecarlo)");
}

namespace {

const std::set<std::string>& known_scenario_keys() {
  static const std::set<std::string> keys = {
      "name", "preset", "seed", "horizon", "control_period", "physics_dt",
      "with_ci", "converge_tol", "record_timing", "r0", "v0", "r_d",
      "target.analytic", "target.model", "target.mesh",
      "guidance.v_max", "guidance.k_p", "guidance.alpha0_gain",
      "guidance.upsilon_c0", "guidance.upsilon_slope", "guidance.p",
      "guidance.omega", "guidance.e_h", "guidance.e_grad_h",
      "control.mu_v", "control.lambda", "control.mu_h", "control.beta",
      "control.beta_e", "control.beta_c", "control.epsilon_filter",
      "control.F_max", "control.allow_invalid_filter", "control.h0",
      "observer.enabled", "observer.l_gain", "observer.A", "observer.C",
      "observer.L",
      "orbit.a", "orbit.e", "orbit.f_theta", "orbit.mu",
      "chaser.m",
      "dynamics.gravity_mode", "dynamics.gravity_sign",
      "disturbance.kind", "disturbance.amplitudes", "disturbance.frequencies",
      "disturbance.phases", "disturbance.A", "disturbance.C",
      "disturbance.xi0",
  };
  return keys;
}

void reject_unknown_keys(const FlatConfig& cfg) {
  const auto& known = known_scenario_keys();
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("montecarlo.", 0) == 0) continue;
    if (!known.count(key)) {
      throw std::invalid_argument("unrecognized scenario key '" + key + "'");
    }
  }
}

}  // namespace

ScenarioConfig scenario_from_config(const FlatConfig& cfg) {
  reject_unknown_keys(cfg);

  ScenarioConfig out;
  if (cfg.has("preset")) out = make_preset(cfg.get_string("preset"));

  out.name = cfg.get_string("name", out.name);
  out.seed = static_cast<std::uint64_t>(cfg.get_double("seed", static_cast<double>(out.seed)));
  out.horizon = cfg.get_double("horizon", out.horizon);
  out.control_period = cfg.get_double("control_period", out.control_period);
  out.physics_dt = cfg.get_double("physics_dt", out.physics_dt);
  out.with_ci = cfg.get_bool("with_ci", out.with_ci);
  out.converge_tol = cfg.get_double("converge_tol", out.converge_tol);
  out.record_timing = cfg.get_bool("record_timing", out.record_timing);
  if (cfg.has("r0")) out.r0 = to_vec3(cfg.get_doubles("r0"), "r0");
  if (cfg.has("v0")) out.v0 = to_vec3(cfg.get_doubles("v0"), "v0");
  if (cfg.has("r_d")) out.r_d = to_vec3(cfg.get_doubles("r_d"), "r_d");

  if (cfg.has("target.analytic")) out.target.analytic = cfg.get_string("target.analytic");
  if (cfg.has("target.model")) out.target.model_path = cfg.get_string("target.model");
  if (cfg.has("target.mesh")) out.target.mesh_path = cfg.get_string("target.mesh");
  if (cfg.has("target.model") && !out.target.model_path.empty()) out.target.analytic.clear();

  auto& g = out.guidance;
  g.v_max = cfg.get_double("guidance.v_max", g.v_max);
  g.k_p = cfg.get_double("guidance.k_p", g.k_p);
  g.alpha0_gain = cfg.get_double("guidance.alpha0_gain", g.alpha0_gain);
  g.upsilon_c0 = cfg.get_double("guidance.upsilon_c0", g.upsilon_c0);
  g.upsilon_slope = cfg.get_double("guidance.upsilon_slope", g.upsilon_slope);
  g.p = cfg.get_double("guidance.p", g.p);
  if (cfg.has("guidance.omega")) g.Omega = to_mat3(cfg.get_doubles("guidance.omega"), "guidance.omega");
  if (cfg.has("guidance.e_h")) out.e_h_override = cfg.get_double("guidance.e_h");
  if (cfg.has("guidance.e_grad_h")) out.e_grad_h_override = cfg.get_double("guidance.e_grad_h");

  auto& c = out.control;
  c.mu_v = cfg.get_double("control.mu_v", c.mu_v);
  c.lambda = cfg.get_double("control.lambda", c.lambda);
  c.mu_h = cfg.get_double("control.mu_h", c.mu_h);
  c.beta = cfg.get_double("control.beta", c.beta);
  c.beta_e = cfg.get_double("control.beta_e", c.beta_e);
  c.beta_c = cfg.get_double("control.beta_c", c.beta_c);
  c.epsilon_filter = cfg.get_double("control.epsilon_filter", c.epsilon_filter);
  c.F_max = cfg.get_double("control.F_max", c.F_max);
  c.allow_invalid_filter = cfg.get_bool("control.allow_invalid_filter", c.allow_invalid_filter);
  if (cfg.has("control.h0")) c.H0 = to_mat3(cfg.get_doubles("control.h0"), "control.h0");

  auto& ob = out.observer;
  ob.enabled = cfg.get_bool("observer.enabled", ob.enabled);
  if (cfg.has("observer.l_gain")) {
    ob.L = cfg.get_double("observer.l_gain") * Eigen::MatrixXd::Identity(3, 3);
  }
  if (cfg.has("observer.A")) ob.A = to_mat3(cfg.get_doubles("observer.A"), "observer.A");
  if (cfg.has("observer.C")) ob.C = to_mat3(cfg.get_doubles("observer.C"), "observer.C");
  if (cfg.has("observer.L")) ob.L = to_mat3(cfg.get_doubles("observer.L"), "observer.L");

  out.orbit.a = cfg.get_double("orbit.a", out.orbit.a);
  out.orbit.e = cfg.get_double("orbit.e", out.orbit.e);
  out.orbit.f_theta = cfg.get_double("orbit.f_theta", out.orbit.f_theta);
  out.orbit.mu = cfg.get_double("orbit.mu", out.orbit.mu);

  out.chaser.m = cfg.get_double("chaser.m", out.chaser.m);

  const std::string mode = cfg.get_string("dynamics.gravity_mode", "exact");
  if (mode == "exact") {
    out.dynamics_options.gravity_mode = dynamics::GravityMode::exact;
  } else if (mode == "linearized") {
    out.dynamics_options.gravity_mode = dynamics::GravityMode::linearized;
  } else {
    throw std::invalid_argument("dynamics.gravity_mode must be 'exact' or 'linearized'");
  }
  out.dynamics_options.gravity_sign =
      cfg.get_double("dynamics.gravity_sign", out.dynamics_options.gravity_sign);

  const std::string kind = cfg.get_string("disturbance.kind", "");
  if (!kind.empty()) {
    if (kind == "none") {
      out.disturbance = dynamics::DisturbanceModel::make_none();
    } else if (kind == "sinusoid") {
      out.disturbance = dynamics::DisturbanceModel::make_sinusoid(
          to_vec3(cfg.get_doubles("disturbance.amplitudes"), "disturbance.amplitudes"),
          to_vec3(cfg.get_doubles("disturbance.frequencies"), "disturbance.frequencies"),
          cfg.has("disturbance.phases")
              ? to_vec3(cfg.get_doubles("disturbance.phases"), "disturbance.phases")
              : Eigen::Vector3d::Zero());
    } else if (kind == "exosystem") {
      const std::vector<double> xi0 = cfg.get_doubles("disturbance.xi0");
      const Eigen::Index q = static_cast<Eigen::Index>(xi0.size());
      const std::vector<double> a = cfg.get_doubles("disturbance.A");
      const std::vector<double> cm = cfg.get_doubles("disturbance.C");
      if (static_cast<Eigen::Index>(a.size()) != q * q ||
          static_cast<Eigen::Index>(cm.size()) != 3 * q) {
        throw std::invalid_argument(
            "disturbance exosystem: A must be q*q and C 3*q where q = len(xi0)");
      }
      Eigen::MatrixXd A(q, q), C(3, q);
      for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j < q; ++j) A(i, j) = a[static_cast<std::size_t>(i * q + j)];
      for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < q; ++j) C(i, j) = cm[static_cast<std::size_t>(i * q + j)];
      Eigen::VectorXd xi = Eigen::Map<const Eigen::VectorXd>(xi0.data(), q);
      out.disturbance = dynamics::DisturbanceModel::make_exosystem(A, C, xi);
    } else {
      throw std::invalid_argument("disturbance.kind must be none, sinusoid or exosystem");
    }
  }

  // The chaser limits are single-sourced from the control and guidance
  // blocks so the plant, filter and clamp can never disagree.
  out.chaser.F_max = out.control.F_max;
  out.chaser.v_max = out.guidance.v_max;

  out.validate();
  return out;
}

MonteCarloParams mc_params_from_config(const FlatConfig& cfg) {
  MonteCarloParams params;
  params.n_runs = static_cast<int>(cfg.get_double("montecarlo.n_runs", params.n_runs));
  if (cfg.has("montecarlo.box_lo")) {
    params.box_lo = to_vec3(cfg.get_doubles("montecarlo.box_lo"), "montecarlo.box_lo");
  }
  if (cfg.has("montecarlo.box_hi")) {
    params.box_hi = to_vec3(cfg.get_doubles("montecarlo.box_hi"), "montecarlo.box_hi");
  }
  params.parallelism =
      static_cast<int>(cfg.get_double("montecarlo.parallelism", params.parallelism));
  params.max_resamples =
      static_cast<int>(cfg.get_double("montecarlo.max_resamples", params.max_resamples));
  params.validate();
  return params;
}

ScenarioConfig load_scenario(const std::string& path) {
  return scenario_from_config(load_config_file(path));
}

std::map<std::string, std::string> scenario_meta(const ScenarioConfig& cfg) {
  std::map<std::string, std::string> meta;
  meta["name"] = cfg.name;
  meta["seed"] = std::to_string(cfg.seed);
  meta["horizon"] = format_g17(cfg.horizon);
  meta["control_period"] = format_g17(cfg.control_period);
  meta["physics_dt"] = format_g17(cfg.physics_dt);
  meta["with_ci"] = cfg.with_ci ? "true" : "false";
  meta["converge_tol"] = format_g17(cfg.converge_tol);
  meta["record_timing"] = cfg.record_timing ? "true" : "false";
  meta["r0"] = vec_string(cfg.r0);
  meta["v0"] = vec_string(cfg.v0);
  meta["r_d"] = vec_string(cfg.r_d);
  meta["target.analytic"] = cfg.target.analytic;
  meta["target.model"] = cfg.target.model_path;
  meta["target.mesh"] = cfg.target.mesh_path;
  meta["guidance.v_max"] = format_g17(cfg.guidance.v_max);
  meta["guidance.k_p"] = format_g17(cfg.guidance.k_p);
  meta["guidance.alpha0_gain"] = format_g17(cfg.guidance.alpha0_gain);
  meta["guidance.upsilon_c0"] = format_g17(cfg.guidance.upsilon_c0);
  meta["guidance.upsilon_slope"] = format_g17(cfg.guidance.upsilon_slope);
  meta["guidance.p"] = format_g17(cfg.guidance.p);
  meta["guidance.omega"] = mat_string(cfg.guidance.Omega);
  meta["guidance.e_h"] = cfg.e_h_override ? format_g17(*cfg.e_h_override) : "auto";
  meta["guidance.e_grad_h"] =
      cfg.e_grad_h_override ? format_g17(*cfg.e_grad_h_override) : "auto";
  meta["control.mu_v"] = format_g17(cfg.control.mu_v);
  meta["control.lambda"] = format_g17(cfg.control.lambda);
  meta["control.mu_h"] = format_g17(cfg.control.mu_h);
  meta["control.beta"] = format_g17(cfg.control.beta);
  meta["control.beta_e"] = format_g17(cfg.control.beta_e);
  meta["control.beta_c"] = format_g17(cfg.control.beta_c);
  meta["control.epsilon_filter"] = format_g17(cfg.control.epsilon_filter);
  meta["control.F_max"] = format_g17(cfg.control.F_max);
  meta["control.allow_invalid_filter"] = cfg.control.allow_invalid_filter ? "true" : "false";
  meta["control.h0"] = mat_string(cfg.control.H0);
  meta["observer.enabled"] = cfg.observer.enabled ? "true" : "false";
  meta["observer.A"] = mat_string(cfg.observer.A);
  meta["observer.C"] = mat_string(cfg.observer.C);
  meta["observer.L"] = mat_string(cfg.observer.L);
  meta["orbit.a"] = format_g17(cfg.orbit.a);
  meta["orbit.e"] = format_g17(cfg.orbit.e);
  meta["orbit.f_theta"] = format_g17(cfg.orbit.f_theta);
  meta["orbit.mu"] = format_g17(cfg.orbit.mu);
  meta["chaser.m"] = format_g17(cfg.chaser.m);
  meta["chaser.F_max"] = format_g17(cfg.chaser.F_max);
  meta["chaser.v_max"] = format_g17(cfg.chaser.v_max);
  meta["dynamics.gravity_mode"] =
      cfg.dynamics_options.gravity_mode == dynamics::GravityMode::exact ? "exact"
                                                                        : "linearized";
  meta["dynamics.gravity_sign"] = format_g17(cfg.dynamics_options.gravity_sign);
  switch (cfg.disturbance.kind) {
    case dynamics::DisturbanceModel::Kind::none:
      meta["disturbance.kind"] = "none";
      break;
    case dynamics::DisturbanceModel::Kind::sinusoid:
      meta["disturbance.kind"] = "sinusoid";
      meta["disturbance.amplitudes"] = vec_string(cfg.disturbance.amplitudes);
      meta["disturbance.frequencies"] = vec_string(cfg.disturbance.frequencies);
      meta["disturbance.phases"] = vec_string(cfg.disturbance.phases);
      break;
    case dynamics::DisturbanceModel::Kind::exosystem:
      meta["disturbance.kind"] = "exosystem";
      meta["disturbance.A"] = mat_string(cfg.disturbance.A);
      meta["disturbance.C"] = mat_string(cfg.disturbance.C);
      meta["disturbance.xi0"] = vec_string(cfg.disturbance.xi0);
      break;
  }
  return meta;
}

namespace {

/// Everything a model-backed evaluator must keep alive.
struct ModelRuntime {
  nsdf::LoadedModel model;
  std::unique_ptr<geom::SdfOracle> oracle;
  std::unique_ptr<geom::ScalarField> analytic;
};

}  // namespace

TargetRuntime resolve_target(const ScenarioConfig& cfg) {
  TargetRuntime rt;
  auto holder = std::make_shared<ModelRuntime>();

  if (!cfg.target.analytic.empty()) {
    holder->analytic = geom::make_analytic_target(cfg.target.analytic);
    const geom::ScalarField* f = holder->analytic.get();
    rt.field = [f](const Eigen::Vector3d& p) {
      return guidance::FieldSample{f->value(p), f->gradient(p)};
    };
    // Analytic shapes are their own oracle: the conservative margins come
    // from the overrides below, the truth channel is exact.
    rt.truth = rt.field;
    rt.bounds = {kDefaultAnalyticEh, kDefaultAnalyticEgradh};
  } else {
    holder->model = nsdf::load_model(cfg.target.model_path);
    const nsdf::MlpParams* params = &holder->model.params;
    rt.field = [params](const Eigen::Vector3d& p) {
      const nsdf::ValueAndGradient vg = nsdf::forward_with_gradient(*params, p);
      return guidance::FieldSample{vg.value, vg.gradient};
    };
    if (holder->model.info.bounds) {
      rt.bounds = *holder->model.info.bounds;
    } else if (!cfg.e_h_override || !cfg.e_grad_h_override) {
      throw std::invalid_argument(
          "target model carries no certified bounds; set guidance.e_h and "
          "guidance.e_grad_h explicitly");
    }
    if (!cfg.target.mesh_path.empty()) {
      holder->oracle =
          std::make_unique<geom::SdfOracle>(geom::load_mesh(cfg.target.mesh_path));
      const geom::SdfOracle* oracle = holder->oracle.get();
      rt.truth = [oracle](const Eigen::Vector3d& p) {
        return guidance::FieldSample{oracle->signed_distance(p), oracle->gradient(p).g};
      };
    }
  }

  if (cfg.e_h_override) rt.bounds.e_h = *cfg.e_h_override;
  if (cfg.e_grad_h_override) rt.bounds.e_grad_h = *cfg.e_grad_h_override;
  rt.keepalive = holder;
  return rt;
}

}  // namespace sdfprox::sim
