#include "sdfprox/dynamics/orbit.hpp"

#include <cmath>
#include <stdexcept>

namespace sdfprox::dynamics {

void OrbitState::validate() const {
  if (!(a > 0.0)) {
    throw std::invalid_argument("OrbitState: a must be > 0");
  }
  if (!(e >= 0.0 && e < 1.0)) {
    throw std::invalid_argument("OrbitState: e must lie in [0, 1)");
  }
  if (!(mu > 0.0)) {
    throw std::invalid_argument("OrbitState: mu must be > 0");
  }
  if (!std::isfinite(f_theta)) {
    throw std::invalid_argument("OrbitState: f_theta must be finite");
  }
}

double OrbitState::radius() const {
  return a * (1.0 - e * e) / (1.0 + e * std::cos(f_theta));
}

Eigen::Vector3d OrbitState::target_inertial_position() const {
  const double rt = radius();
  return {rt * std::cos(f_theta), rt * std::sin(f_theta), 0.0};
}

Eigen::Matrix3d OrbitState::frame_to_inertial() const {
  const double cf = std::cos(f_theta);
  const double sf = std::sin(f_theta);
  // Columns are the frame axes in inertial coordinates: x follows the
  // motion, y is the negative orbit normal, z points at the attracting
  // center.
  Eigen::Matrix3d R;
  R.col(0) = Eigen::Vector3d(-sf, cf, 0.0);
  R.col(1) = Eigen::Vector3d(0.0, 0.0, -1.0);
  R.col(2) = Eigen::Vector3d(-cf, -sf, 0.0);
  return R;
}

AnomalyRates true_anomaly_rates(const OrbitState& orbit) {
  const double one_minus_e2 = 1.0 - orbit.e * orbit.e;
  const double denom =
      orbit.a * orbit.a * orbit.a * one_minus_e2 * one_minus_e2 * one_minus_e2;
  const double base = 1.0 + orbit.e * std::cos(orbit.f_theta);
  AnomalyRates rates;
  rates.f_dot = std::sqrt(orbit.mu / denom) * base * base;
  rates.f_ddot = -2.0 * orbit.mu * orbit.e * std::sin(orbit.f_theta) * base *
                 base * base / denom;
  return rates;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d S;
  S << 0.0, -w.z(), w.y(),  //
      w.z(), 0.0, -w.x(),   //
      -w.y(), w.x(), 0.0;
  return S;
}

FrameMatrices frame_matrices(const OrbitState& orbit) {
  const AnomalyRates rates = true_anomaly_rates(orbit);
  FrameMatrices out;
  out.omega_o = Eigen::Vector3d(0.0, -rates.f_dot, 0.0);
  const Eigen::Vector3d omega_dot_o(0.0, -rates.f_ddot, 0.0);
  const Eigen::Matrix3d W = skew(out.omega_o);
  out.C1 = 2.0 * W;
  out.C2 = skew(omega_dot_o) + W * W;
  return out;
}

Eigen::Vector3d differential_gravity(const OrbitState& orbit,
                                     const Eigen::Vector3d& r,
                                     GravityMode mode) {
  const double rt = orbit.radius();
  if (mode == GravityMode::linearized) {
    const double k = orbit.mu / (rt * rt * rt);
    return {k * r.x(), k * r.y(), -2.0 * k * r.z()};
  }
  const Eigen::Vector3d r_ti = orbit.target_inertial_position();
  const Eigen::Matrix3d R = orbit.frame_to_inertial();
  const Eigen::Vector3d r_si = r_ti + R * r;
  const double n_si = r_si.norm();
  const double n_ti = r_ti.norm();
  // Non-finite inputs are allowed to flow through so integrators can report
  // them; only the exactly singular point is rejected here.
  if (n_si == 0.0) {
    throw std::invalid_argument(
        "differential_gravity: chaser at the attracting center");
  }
  const Eigen::Vector3d g_inertial =
      orbit.mu * (r_si / (n_si * n_si * n_si) - r_ti / (n_ti * n_ti * n_ti));
  return R.transpose() * g_inertial;
}

}  // namespace sdfprox::dynamics
