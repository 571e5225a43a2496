#pragma once

#include <Eigen/Dense>

#include "sdfprox/control/observer.hpp"
#include "sdfprox/dynamics/relative_motion.hpp"
#include "sdfprox/guidance/safe_velocity.hpp"
#include "sdfprox/neural_sdf/bounds.hpp"

namespace sdfprox::control {

// Gains of the composite controller and its smooth safety filter.
struct ControlConfig {
  double mu_v = 1e-4;    // position-feedback weight on H0 r_e
  double lambda = 15.0;  // velocity-error feedback gain
  Eigen::Matrix3d H0 = Eigen::Matrix3d::Identity();
  double mu_h = 2.0;   // velocity-penalty scale of the barrier
  double beta = 1.0;   // estimation-error weight of the barrier
  double beta_e = 1.5; // observer decay rate assumed by the filter
  double beta_c = 1.0; // barrier class-K gain
  double epsilon_filter = 10.0;  // smooth-filter sharpness
  double F_max = 0.1;            // per-axis thrust limit (N)

  // The filter's correction term divides by 2*beta*(2*beta_e - beta_c); the
  // completing-the-square argument behind it needs 2*beta_e > beta_c. Setting
  // this flag accepts gains that violate the inequality (the term then flips
  // sign), which is useful only for reproducing misconfigured baselines.
  bool allow_invalid_filter = false;

  void validate() const;
};

// u_ref = m (C1 v + C2 r - g + J_vs v - mu_v H0 (r - r_d) - (lambda/2)(v - v_s)):
// cancels the known dynamics and drives v toward v_s and r toward r_d.
Eigen::Vector3d reference_control(const dynamics::RelState& state,
                                  const Eigen::Vector3d& r_d,
                                  const Eigen::Vector3d& v_s,
                                  const Eigen::Matrix3d& J_vs,
                                  const PlantCoefficients& coeffs,
                                  const ControlConfig& cfg, double m);

// Scalar data of the half-space filter constraint a_h1 + Lambda b_h1 >= 0.
struct FilterCoeffs {
  double a_h1 = 0.0;
  double b_h1 = 0.0;
  Eigen::Vector3d P_h1 = Eigen::Vector3d::Zero();
};

// Assembles the filter coefficients from the conservative field sample
// (value, gradient), its certified error bounds, and the current state:
//   P_h1 = -(1/(m mu_h)) (v - v_s),            b_h1 = ||P_h1||^2,
//   a_h1 = P_h1 . u_ref + grad_f . v - e_grad_h ||v||
//        + (1/mu_h) (v - v_s) . (C1 v + C2 r - g + J_vs v)
//        + beta_c (f - e_h - (1/(2 mu_h)) ||v - v_s||^2)
//        - b_h1 / (2 beta (2 beta_e - beta_c)).
FilterCoeffs smooth_filter_coeffs(const dynamics::RelState& state,
                                  const Eigen::Vector3d& v_s,
                                  const Eigen::Matrix3d& J_vs,
                                  const Eigen::Vector3d& u_ref,
                                  const guidance::FieldSample& sdf,
                                  const nsdf::ErrorBounds& bounds,
                                  const PlantCoefficients& coeffs,
                                  const ControlConfig& cfg, double m);

// Smooth safety-filter coefficient
//   Lambda(a, b) = 0 when b = 0, else (1/eps) ln(1 + exp(-eps a / b)).
// Stabilized so no intermediate overflows, and nudged upward by ulps when
// needed so that fma(Lambda, b, a) > 0 holds exactly for every b > 0.
double lambda_filter(double a, double b, double eps);

struct ControlTelemetry {
  Eigen::Vector3d u_ref = Eigen::Vector3d::Zero();
  double lambda = 0.0;  // applied filter coefficient Lambda
  double a_h1 = 0.0;
  double b_h1 = 0.0;
  Eigen::Vector3d d_hat = Eigen::Vector3d::Zero();
  bool saturated = false;
};

struct SafeControlResult {
  Eigen::Vector3d F = Eigen::Vector3d::Zero();
  ControlTelemetry telemetry;
};

// Applied force F = u_ref + Lambda P_h1 - d_hat, clamped per axis to
// [-F_max, F_max] with a saturation flag.
SafeControlResult safe_control(const dynamics::RelState& state,
                               const Eigen::Vector3d& r_d,
                               const Eigen::Vector3d& v_s,
                               const Eigen::Matrix3d& J_vs,
                               const ObserverState& obs,
                               const guidance::FieldSample& sdf,
                               const nsdf::ErrorBounds& bounds,
                               const PlantCoefficients& coeffs,
                               const ControlConfig& cfg, double m);

// Velocity- and estimation-augmented barrier
//   h1 = h - (1/(2 mu_h)) ||v - v_s||^2 - beta * (1/2) ||e_d||^2,
// where h is the conservative position barrier and e_d the true estimation
// error (telemetry only; the control path never reads it).
double barrier_h1(double h, const dynamics::RelState& state,
                  const Eigen::Vector3d& v_s, const Eigen::Vector3d& e_d,
                  const ControlConfig& cfg);

// V0 = (1/2) r_e' H0 r_e.
double lyapunov_v0(const Eigen::Vector3d& r_e, const ControlConfig& cfg);

// V1 = V0 + (1/(2 mu_v)) ||v - v_s||^2.
double lyapunov_v1(const Eigen::Vector3d& r_e, const Eigen::Vector3d& v,
                   const Eigen::Vector3d& v_s, const ControlConfig& cfg);

}  // namespace sdfprox::control
