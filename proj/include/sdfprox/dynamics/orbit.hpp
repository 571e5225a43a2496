#pragma once

#include <Eigen/Core>

namespace sdfprox::dynamics {

/**
 * Keplerian two-body orbit of the target, tracked by true anomaly. The orbit
 * plane is the inertial x-y plane with periapsis on +x. The relative-motion
 * frame is centered on the target with x along the direction of motion,
 * y along the negative orbit normal, and z pointing at the attracting
 * center, so the frame angular velocity is (0, -f_dot, 0).
 */
struct OrbitState {
  double a = 6871e3;           ///< semimajor axis (m)
  double e = 0.01;             ///< eccentricity
  double f_theta = 0.0;        ///< true anomaly (rad)
  double mu = 3.986004418e14;  ///< gravitational parameter (m^3/s^2)

  /// Throws std::invalid_argument unless a > 0, 0 <= e < 1, mu > 0 and
  /// f_theta is finite.
  void validate() const;

  /// Conic radius a(1 - e^2)/(1 + e cos f_theta) (m).
  double radius() const;

  /// Target position in the inertial frame (m).
  Eigen::Vector3d target_inertial_position() const;

  /// Rotation taking relative-frame coordinates to inertial coordinates.
  Eigen::Matrix3d frame_to_inertial() const;
};

struct AnomalyRates {
  double f_dot = 0.0;   ///< rad/s
  double f_ddot = 0.0;  ///< rad/s^2
};

/**
 * Closed-form true-anomaly rates:
 *   f_dot  = sqrt(mu / (a^3 (1-e^2)^3)) (1 + e cos f)^2
 *   f_ddot = -2 mu e sin f (1 + e cos f)^3 / (a^3 (1-e^2)^3)
 */
AnomalyRates true_anomaly_rates(const OrbitState& orbit);

/// 3x3 cross-product matrix of w, so skew(w) * u == w x u.
Eigen::Matrix3d skew(const Eigen::Vector3d& w);

/**
 * Rotating-frame coefficient matrices built from omega_o = (0, -f_dot, 0)
 * and its rate (0, -f_ddot, 0): C1 = 2 skew(omega_o) (skew-symmetric) and
 * C2 = skew(omega_dot_o) + skew(omega_o)^2.
 */
struct FrameMatrices {
  Eigen::Matrix3d C1;
  Eigen::Matrix3d C2;
  Eigen::Vector3d omega_o;
};

FrameMatrices frame_matrices(const OrbitState& orbit);

enum class GravityMode { exact, linearized };

/**
 * Differential gravity mu(r_SI/|r_SI|^3 - r_TI/|r_TI|^3) expressed in the
 * relative frame, where r_TI is the target inertial position and
 * r_SI = r_TI + R r. Linearized mode returns the first-order expansion
 * about the target, (mu/r_t^3) (r_x, r_y, -2 r_z).
 */
Eigen::Vector3d differential_gravity(const OrbitState& orbit,
                                     const Eigen::Vector3d& r,
                                     GravityMode mode = GravityMode::exact);

}  // namespace sdfprox::dynamics
