#include "sdfprox/control/controller.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sdfprox::control {

void ControlConfig::validate() const {
  const auto positive = [](double value, const char* name) {
    if (!(value > 0.0)) {
      throw std::invalid_argument(std::string("ControlConfig: ") + name +
                                  " must be positive");
    }
  };
  positive(mu_v, "mu_v");
  positive(lambda, "lambda");
  positive(mu_h, "mu_h");
  positive(beta, "beta");
  positive(beta_e, "beta_e");
  positive(beta_c, "beta_c");
  positive(epsilon_filter, "epsilon_filter");
  positive(F_max, "F_max");
  const double scale = 1.0 + H0.cwiseAbs().maxCoeff();
  if ((H0 - H0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("ControlConfig: H0 must be symmetric");
  }
  const Eigen::LLT<Eigen::Matrix3d> llt(H0);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("ControlConfig: H0 must be positive definite");
  }
  const double denom = 2.0 * beta_e - beta_c;
  if (denom == 0.0) {
    throw std::invalid_argument(
        "ControlConfig: 2*beta_e - beta_c must be nonzero");
  }
  if (!allow_invalid_filter && !(denom > 0.0)) {
    throw std::invalid_argument(
        "ControlConfig: filter gains require 2*beta_e > beta_c (set "
        "allow_invalid_filter to accept anyway)");
  }
}

Eigen::Vector3d reference_control(const dynamics::RelState& state,
                                  const Eigen::Vector3d& r_d,
                                  const Eigen::Vector3d& v_s,
                                  const Eigen::Matrix3d& J_vs,
                                  const PlantCoefficients& coeffs,
                                  const ControlConfig& cfg, double m) {
  const Eigen::Vector3d r_e = state.r - r_d;
  return m * (coeffs.C1 * state.v + coeffs.C2 * state.r - coeffs.g +
              J_vs * state.v - cfg.mu_v * (cfg.H0 * r_e) -
              (0.5 * cfg.lambda) * (state.v - v_s));
}

FilterCoeffs smooth_filter_coeffs(const dynamics::RelState& state,
                                  const Eigen::Vector3d& v_s,
                                  const Eigen::Matrix3d& J_vs,
                                  const Eigen::Vector3d& u_ref,
                                  const guidance::FieldSample& sdf,
                                  const nsdf::ErrorBounds& bounds,
                                  const PlantCoefficients& coeffs,
                                  const ControlConfig& cfg, double m) {
  const Eigen::Vector3d ve = state.v - v_s;
  FilterCoeffs out;
  out.P_h1 = -(1.0 / (m * cfg.mu_h)) * ve;
  out.b_h1 = out.P_h1.squaredNorm();
  const double drift =
      (1.0 / cfg.mu_h) * ve.dot(coeffs.C1 * state.v + coeffs.C2 * state.r -
                                coeffs.g + J_vs * state.v);
  const double margin =
      sdf.value - bounds.e_h - ve.squaredNorm() / (2.0 * cfg.mu_h);
  out.a_h1 = out.P_h1.dot(u_ref) + sdf.gradient.dot(state.v) -
             bounds.e_grad_h * state.v.norm() + drift + cfg.beta_c * margin -
             out.b_h1 / (2.0 * cfg.beta * (2.0 * cfg.beta_e - cfg.beta_c));
  return out;
}

double lambda_filter(double a, double b, double eps) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("lambda_filter: eps must be positive");
  }
  if (!(b >= 0.0)) {
    throw std::invalid_argument("lambda_filter: b must be nonnegative");
  }
  if (b == 0.0) {
    return 0.0;
  }
  const double t = eps * a / b;
  double lambda = t >= 0.0 ? std::log1p(std::exp(-t)) / eps
                           : (-t + std::log1p(std::exp(t))) / eps;
  // The safety argument downstream needs a + lambda*b >= 0 to survive
  // floating-point evaluation, and rounding of the softplus can land the
  // product one ulp short of cancelling a negative a.
  double slack = std::fma(lambda, b, a);
  for (int i = 0; i < 64 && slack <= 0.0; ++i) {
    lambda = std::nextafter(lambda, std::numeric_limits<double>::infinity());
    slack = std::fma(lambda, b, a);
  }
  return lambda;
}

SafeControlResult safe_control(const dynamics::RelState& state,
                               const Eigen::Vector3d& r_d,
                               const Eigen::Vector3d& v_s,
                               const Eigen::Matrix3d& J_vs,
                               const ObserverState& obs,
                               const guidance::FieldSample& sdf,
                               const nsdf::ErrorBounds& bounds,
                               const PlantCoefficients& coeffs,
                               const ControlConfig& cfg, double m) {
  cfg.validate();
  SafeControlResult out;
  out.telemetry.u_ref =
      reference_control(state, r_d, v_s, J_vs, coeffs, cfg, m);
  const FilterCoeffs fc = smooth_filter_coeffs(
      state, v_s, J_vs, out.telemetry.u_ref, sdf, bounds, coeffs, cfg, m);
  out.telemetry.a_h1 = fc.a_h1;
  out.telemetry.b_h1 = fc.b_h1;
  out.telemetry.lambda =
      lambda_filter(fc.a_h1, fc.b_h1, cfg.epsilon_filter);
  out.telemetry.d_hat = obs.d_hat;

  Eigen::Vector3d F =
      out.telemetry.u_ref + out.telemetry.lambda * fc.P_h1 - obs.d_hat;
  for (int i = 0; i < 3; ++i) {
    if (F[i] > cfg.F_max) {
      F[i] = cfg.F_max;
      out.telemetry.saturated = true;
    } else if (F[i] < -cfg.F_max) {
      F[i] = -cfg.F_max;
      out.telemetry.saturated = true;
    }
  }
  out.F = F;
  return out;
}

double barrier_h1(double h, const dynamics::RelState& state,
                  const Eigen::Vector3d& v_s, const Eigen::Vector3d& e_d,
                  const ControlConfig& cfg) {
  const Eigen::Vector3d ve = state.v - v_s;
  return h - ve.squaredNorm() / (2.0 * cfg.mu_h) -
         cfg.beta * (0.5 * e_d.squaredNorm());
}

double lyapunov_v0(const Eigen::Vector3d& r_e, const ControlConfig& cfg) {
  return 0.5 * r_e.dot(cfg.H0 * r_e);
}

double lyapunov_v1(const Eigen::Vector3d& r_e, const Eigen::Vector3d& v,
                   const Eigen::Vector3d& v_s, const ControlConfig& cfg) {
  return lyapunov_v0(r_e, cfg) + (v - v_s).squaredNorm() / (2.0 * cfg.mu_v);
}

}  // namespace sdfprox::control
