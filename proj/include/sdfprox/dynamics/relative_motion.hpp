#pragma once

#include <functional>

#include <Eigen/Core>

#include "sdfprox/dynamics/orbit.hpp"

namespace sdfprox::dynamics {

/// Chaser state relative to the target, in the target orbital frame.
struct RelState {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();  ///< m
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  ///< m/s
};

struct ChaserParams {
  double m = 20.0;     ///< mass (kg)
  double F_max = 0.1;  ///< per-axis thrust bound (N)
  double v_max = 0.1;  ///< per-axis speed bound (m/s)

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

/**
 * Model options. gravity_sign selects how the differential-gravity vector g
 * enters the acceleration: +1 (default) adds it, matching the model the
 * composite controller is derived against; -1 subtracts it, which is the
 * reading that reproduces the Clohessy-Wiltshire limit.
 */
struct DynamicsOptions {
  GravityMode gravity_mode = GravityMode::exact;
  double gravity_sign = 1.0;
};

/**
 * Relative acceleration in the target orbital frame:
 *   v_dot = -C1 v - C2 r + gravity_sign * g + (F + d)/m.
 */
Eigen::Vector3d relative_accel(const RelState& state, const OrbitState& orbit,
                               const Eigen::Vector3d& F,
                               const Eigen::Vector3d& d,
                               const ChaserParams& chaser,
                               const DynamicsOptions& options = {});

struct StepResult {
  RelState state;
  OrbitState orbit;
};

/**
 * Advance (r, v, f_theta) jointly by classical fourth-order Runge-Kutta over
 * dt split into substeps equal intervals. The thrust F is held constant over
 * the whole interval (zero-order hold); the disturbance signal is evaluated
 * at the Runge-Kutta stage times measured from t0. A null d_signal means no
 * disturbance. Throws std::invalid_argument on dt <= 0 or substeps < 1 and
 * std::runtime_error if the state stops being finite.
 */
StepResult step(const RelState& state, const OrbitState& orbit,
                const Eigen::Vector3d& F,
                const std::function<Eigen::Vector3d(double)>& d_signal,
                double t0, double dt, int substeps, const ChaserParams& chaser,
                const DynamicsOptions& options = {});

}  // namespace sdfprox::dynamics
