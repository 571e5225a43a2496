#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "sdfprox/common/flat_config.hpp"
#include "sdfprox/control/controller.hpp"
#include "sdfprox/dynamics/disturbance.hpp"
#include "sdfprox/dynamics/orbit.hpp"
#include "sdfprox/dynamics/relative_motion.hpp"
#include "sdfprox/guidance/safe_velocity.hpp"
#include "sdfprox/neural_sdf/bounds.hpp"

namespace sdfprox::sim {

/// What the chaser must stay clear of: exactly one of `analytic` (built-in
/// shape tag, see geom::make_analytic_target) or `model_path` (trained
/// clearance-field weights). `mesh_path` optionally names a reference mesh
/// used only for ground-truth clearance in the logs.
struct TargetSpec {
  std::string analytic;
  std::string model_path;
  std::string mesh_path;
};

/// Disturbance observer wiring. A/C/L follow the estimator
///   xi_hat = z + L v,   z_dot = A xi_hat - L (n + C xi_hat / m),
/// with d_hat = C xi_hat. Defaults give the first-order-lag observer with
/// per-axis bandwidth L/m.
struct ObserverSetup {
  bool enabled = true;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd L = 50.0 * Eigen::MatrixXd::Identity(3, 3);
};

/**
 * Complete description of one closed-loop run. Everything an episode does is
 * a pure function of this struct, so equal configs reproduce equal logs.
 */
struct ScenarioConfig {
  std::string name = "scenario";
  TargetSpec target;

  Eigen::Vector3d r0 = Eigen::Vector3d(0.0, 10.0, 6.0);
  Eigen::Vector3d v0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d r_d = Eigen::Vector3d(0.0, -10.0, -4.0);

  double horizon = 3000.0;       ///< total simulated time (s)
  double control_period = 1.0;   ///< force update interval (s)
  double physics_dt = 0.1;       ///< integrator substep (s)

  bool with_ci = true;  ///< keep the circulation row in the velocity filter

  guidance::GuidanceConfig guidance;
  control::ControlConfig control;
  ObserverSetup observer;

  dynamics::OrbitState orbit;
  dynamics::DynamicsOptions dynamics_options;
  dynamics::ChaserParams chaser;
  dynamics::DisturbanceModel disturbance;

  /// Clearance-bound overrides. When unset, model targets use the certified
  /// bounds stored with the weights and analytic targets fall back to the
  /// built-in margins (0.05 m, 0.02).
  std::optional<double> e_h_override;
  std::optional<double> e_grad_h_override;

  std::uint64_t seed = 0;
  double converge_tol = 0.5;   ///< final position error counted as arrival (m)
  bool record_timing = false;  ///< measure per-step compute (breaks rerun
                               ///< byte-identity of logs; off by default)

  /// Physics substeps per control interval; throws if the ratio is not an
  /// integer within 1e-9.
  int substeps_per_control() const;

  /// Number of control intervals; throws if horizon/control_period is not an
  /// integer within 1e-9.
  int control_steps() const;

  /// Throws std::invalid_argument on any inconsistent field, including the
  /// nested guidance/control/orbit/chaser configs.
  void validate() const;
};

/// Monte-Carlo campaign shape: n_runs episodes with r0 drawn uniformly from
/// the axis-aligned box [box_lo, box_hi] (a degenerate axis pins the value).
struct MonteCarloParams {
  int n_runs = 100;
  Eigen::Vector3d box_lo = Eigen::Vector3d(-15.0, -5.0, -4.0);
  Eigen::Vector3d box_hi = Eigen::Vector3d(15.0, 5.0, -4.0);
  int parallelism = 1;
  int max_resamples = 10000;  ///< per-run cap on rejected unsafe starts

  void validate() const;
};

/// Built-in scenarios. case1: approach past the trap wall, circulation
/// toggleable. case2: case1 plus the sinusoidal disturbance, observer
/// toggleable. montecarlo: randomized starts toward the mirrored goal.
ScenarioConfig preset_case1(bool with_ci);
ScenarioConfig preset_case2(bool with_observer);
ScenarioConfig preset_monte_carlo();
MonteCarloParams preset_monte_carlo_params();

/// Resolve a preset by name: "case1", "case1_noci", "case2", "case2_nodo",
/// "montecarlo". Throws std::invalid_argument on unknown names.
ScenarioConfig make_preset(const std::string& name);

/// Apply a parsed scenario file over the built-in defaults. Unknown keys are
/// rejected (typo protection); the "montecarlo" table is read separately by
/// mc_params_from_config.
ScenarioConfig scenario_from_config(const FlatConfig& cfg);
MonteCarloParams mc_params_from_config(const FlatConfig& cfg);

/// Load a .toml or .json scenario file.
ScenarioConfig load_scenario(const std::string& path);

/// Flat key = value echo of every resolved field, used for provenance
/// printing and for the log header. Keys are sorted; values use full
/// precision so the echo reproduces the run.
std::map<std::string, std::string> scenario_meta(const ScenarioConfig& cfg);

/// Runtime realization of a TargetSpec.
struct TargetRuntime {
  guidance::FieldEvaluator field;   ///< conservative field the controller sees
  guidance::FieldEvaluator truth;   ///< exact clearance oracle; null if unknown
  nsdf::ErrorBounds bounds;         ///< margins applied to `field`
  std::shared_ptr<void> keepalive;  ///< owns the evaluator internals
};

/// Build the evaluators for a scenario: loads model weights / meshes,
/// resolves analytic tags and applies bound overrides. The result is
/// read-only and safe to share across concurrent episodes.
TargetRuntime resolve_target(const ScenarioConfig& cfg);

}  // namespace sdfprox::sim
