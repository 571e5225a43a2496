#pragma once

#include <Eigen/Core>

namespace sdfprox::dynamics {

/**
 * External disturbance force on the chaser: either a per-axis sinusoid
 * d_i(t) = amplitude_i sin(frequency_i t + phase_i), or a linear exosystem
 * d(t) = C exp(A t) xi0, or identically zero.
 */
struct DisturbanceModel {
  enum class Kind { none, sinusoid, exosystem };
  Kind kind = Kind::none;

  Eigen::Vector3d amplitudes = Eigen::Vector3d::Zero();
  Eigen::Vector3d frequencies = Eigen::Vector3d::Zero();
  Eigen::Vector3d phases = Eigen::Vector3d::Zero();

  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::VectorXd xi0;

  static DisturbanceModel make_none();
  static DisturbanceModel make_sinusoid(const Eigen::Vector3d& amplitudes,
                                        const Eigen::Vector3d& frequencies,
                                        const Eigen::Vector3d& phases);
  static DisturbanceModel make_exosystem(const Eigen::MatrixXd& A,
                                         const Eigen::MatrixXd& C,
                                         const Eigen::VectorXd& xi0);

  /// Throws std::invalid_argument on inconsistent exosystem dimensions.
  void validate() const;
};

/// Disturbance force at time t (N).
Eigen::Vector3d disturbance_signal(const DisturbanceModel& model, double t);

}  // namespace sdfprox::dynamics
