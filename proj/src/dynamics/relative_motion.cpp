#include "sdfprox/dynamics/relative_motion.hpp"

#include <cmath>
#include <stdexcept>

namespace sdfprox::dynamics {

void ChaserParams::validate() const {
  if (!(m > 0.0) || !(F_max > 0.0) || !(v_max > 0.0)) {
    throw std::invalid_argument(
        "ChaserParams: m, F_max, v_max must all be > 0");
  }
}

Eigen::Vector3d relative_accel(const RelState& state, const OrbitState& orbit,
                               const Eigen::Vector3d& F,
                               const Eigen::Vector3d& d,
                               const ChaserParams& chaser,
                               const DynamicsOptions& options) {
  const FrameMatrices fm = frame_matrices(orbit);
  const Eigen::Vector3d g =
      differential_gravity(orbit, state.r, options.gravity_mode);
  return -fm.C1 * state.v - fm.C2 * state.r + options.gravity_sign * g +
         (F + d) / chaser.m;
}

namespace {

struct JointDeriv {
  Eigen::Vector3d r_dot;
  Eigen::Vector3d v_dot;
  double f_dot = 0.0;
};

JointDeriv joint_derivative(const Eigen::Vector3d& r, const Eigen::Vector3d& v,
                            double f_theta, const OrbitState& orbit_template,
                            const Eigen::Vector3d& F, const Eigen::Vector3d& d,
                            const ChaserParams& chaser,
                            const DynamicsOptions& options) {
  OrbitState orbit = orbit_template;
  orbit.f_theta = f_theta;
  JointDeriv out;
  out.r_dot = v;
  out.v_dot = relative_accel({r, v}, orbit, F, d, chaser, options);
  out.f_dot = true_anomaly_rates(orbit).f_dot;
  return out;
}

}  // namespace

StepResult step(const RelState& state, const OrbitState& orbit,
                const Eigen::Vector3d& F,
                const std::function<Eigen::Vector3d(double)>& d_signal,
                double t0, double dt, int substeps, const ChaserParams& chaser,
                const DynamicsOptions& options) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step: dt must be > 0");
  }
  if (substeps < 1) {
    throw std::invalid_argument("step: substeps must be >= 1");
  }

  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  const double h = dt / substeps;
  Eigen::Vector3d r = state.r;
  Eigen::Vector3d v = state.v;
  double f_theta = orbit.f_theta;

  for (int k = 0; k < substeps; ++k) {
    const double t = t0 + k * h;
    const Eigen::Vector3d d0 = d_signal ? d_signal(t) : zero;
    const Eigen::Vector3d dm = d_signal ? d_signal(t + 0.5 * h) : zero;
    const Eigen::Vector3d d1 = d_signal ? d_signal(t + h) : zero;

    const JointDeriv k1 =
        joint_derivative(r, v, f_theta, orbit, F, d0, chaser, options);
    const JointDeriv k2 = joint_derivative(
        r + 0.5 * h * k1.r_dot, v + 0.5 * h * k1.v_dot,
        f_theta + 0.5 * h * k1.f_dot, orbit, F, dm, chaser, options);
    const JointDeriv k3 = joint_derivative(
        r + 0.5 * h * k2.r_dot, v + 0.5 * h * k2.v_dot,
        f_theta + 0.5 * h * k2.f_dot, orbit, F, dm, chaser, options);
    const JointDeriv k4 =
        joint_derivative(r + h * k3.r_dot, v + h * k3.v_dot,
                         f_theta + h * k3.f_dot, orbit, F, d1, chaser, options);

    r += (h / 6.0) * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot);
    v += (h / 6.0) * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
    f_theta += (h / 6.0) * (k1.f_dot + 2.0 * k2.f_dot + 2.0 * k3.f_dot +
                            k4.f_dot);

    if (!r.allFinite() || !v.allFinite() || !std::isfinite(f_theta)) {
      throw std::runtime_error("step: state became non-finite");
    }
  }

  StepResult out;
  out.state = {r, v};
  out.orbit = orbit;
  out.orbit.f_theta = f_theta;
  return out;
}

}  // namespace sdfprox::dynamics
