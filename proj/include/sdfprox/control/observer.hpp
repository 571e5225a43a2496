#pragma once

#include <Eigen/Dense>

#include <functional>

#include "sdfprox/dynamics/relative_motion.hpp"

namespace sdfprox::control {

// Coefficients of the velocity derivative as the plant integrator applies them:
//   v_dot = -C1 v - C2 r + g + (F + d) / m.
// The gravity vector g carries the sign actually used by the plant, so the
// observer and controller cancel exactly what the dynamics inject.
struct PlantCoefficients {
  Eigen::Matrix3d C1 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d C2 = Eigen::Matrix3d::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
};

// Plant-side quantities sampled at one integration stage of an observer step.
struct PlantSample {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  PlantCoefficients coeffs;
  Eigen::Vector3d F = Eigen::Vector3d::Zero();
};

// Callback returning plant values at a stage offset tau in [0, dt] measured
// from the start of the current observer step.
using PlantSampler = std::function<PlantSample(double)>;

// Nonlinear disturbance observer for d = C xi, xi_dot = A xi. The internal
// state z defines the estimate xi_hat = z + L v, d_hat = C xi_hat, and the
// estimation error obeys e_dot = (A - L C / m) e, so the observer converges
// whenever that matrix is Hurwitz.
struct ObserverState {
  Eigen::VectorXd z;
  Eigen::VectorXd xi_hat;
  Eigen::Vector3d d_hat = Eigen::Vector3d::Zero();
  Eigen::MatrixXd A;  // q x q exosystem matrix
  Eigen::MatrixXd C;  // 3 x q output matrix
  Eigen::MatrixXd L;  // q x 3 observer gain
};

// Builds an observer with xi_hat(0) = 0 (z = -L v), verifying dimensions and
// that A - L C / m has all eigenvalue real parts strictly negative.
ObserverState observer_init(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                            const Eigen::MatrixXd& L,
                            const dynamics::RelState& state, double m);

// Right-hand side of the internal-state equation,
//   z_dot = A xi_hat - L (n + C xi_hat / m),   xi_hat = z + L v,
// where n = -C1 v - C2 r + g + F / m collects every plant term the controller
// knows. Exposed so a coupled plant+observer integrator can evaluate it at
// its own stage values.
Eigen::VectorXd observer_derivative(const ObserverState& obs,
                                    const Eigen::VectorXd& z,
                                    const PlantSample& sample, double m);

// Advances the observer by one RK4 step of length dt, sampling the plant at
// the stage offsets {0, dt/2, dt}. The estimate is refreshed from the
// end-of-step velocity.
ObserverState observer_step(const ObserverState& obs, const PlantSampler& plant,
                            double m, double dt);

// Zero-order-hold convenience overload: plant values are frozen over the step.
ObserverState observer_step(const ObserverState& obs,
                            const dynamics::RelState& state,
                            const PlantCoefficients& coeffs,
                            const Eigen::Vector3d& F, double m, double dt);

}  // namespace sdfprox::control
