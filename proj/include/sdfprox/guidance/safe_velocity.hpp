#pragma once

#include <array>
#include <functional>

#include <Eigen/Core>

#include "sdfprox/neural_sdf/bounds.hpp"
#include "sdfprox/socp/cone_program.hpp"

namespace sdfprox::guidance {

/// Clearance field sample: value and spatial gradient at a query point.
struct FieldSample {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};

/// Evaluates the learned clearance field at a position. Must be safely
/// shareable read-only across episodes.
using FieldEvaluator = std::function<FieldSample(const Eigen::Vector3d&)>;

struct GuidanceConfig {
  static Eigen::Matrix3d default_omega() {
    Eigen::Matrix3d omega;
    omega << 0.0, 0.0, 1.0,  //
        -1.0, 0.0, 0.0,      //
        0.0, 1.0, 0.0;
    return omega;
  }

  double v_max = 0.1;          ///< per-axis speed bound (m/s)
  double k_p = 5.0;            ///< tanh length scale of the nominal velocity (m)
  double alpha0_gain = 0.08;   ///< linear class-K gain (1/s)
  Eigen::Matrix3d Omega = default_omega();  ///< circulation matrix
  double upsilon_c0 = 0.1;     ///< circulation threshold at the surface
  double upsilon_slope = 1.0;  ///< circulation decay with clearance
  double p = 1.0;              ///< slack weight in the objective
  nsdf::ErrorBounds bounds;

  double alpha0(double x) const { return alpha0_gain * x; }
  double upsilon(double x) const { return upsilon_c0 - upsilon_slope * x; }

  /// Throws std::invalid_argument unless v_max, k_p, alpha0_gain, p,
  /// upsilon_c0 and upsilon_slope are all positive.
  void validate() const;
};

/// Which rows were tight at the returned point (boundary within tolerance).
struct ActiveConstraints {
  bool cbf = false;
  bool circulation = false;
  std::array<bool, 3> box_upper{};  ///< v_s,i = +v_max
  std::array<bool, 3> box_lower{};  ///< v_s,i = -v_max

  bool operator==(const ActiveConstraints&) const = default;
};

struct SafeVelocityResult {
  Eigen::Vector3d v_s = Eigen::Vector3d::Zero();
  double sigma = 0.0;
  ActiveConstraints active_constraints;
  bool fallback_used = false;
  socp::SolveStatus solver_status = socp::SolveStatus::numerical_failure;
  double solve_time = 0.0;  ///< seconds spent in the cone solver
};

/// Elementwise stabilizing velocity -v_max tanh((r - r_d)/k_p).
Eigen::Vector3d nominal_velocity(const Eigen::Vector3d& r,
                                 const Eigen::Vector3d& r_d, double v_max,
                                 double k_p);

/**
 * Robust safety row as a second-order cone constraint over v_s:
 * ‖e_grad_h v_s‖ ≤ grad_f·v_s + alpha0_gain (f - e_h), i.e. the safety
 * condition holds for every field whose value and gradient lie within the
 * certified error bounds of the learned one.
 */
socp::SocConstraint robust_cbf_row(const Eigen::Vector3d& grad_f, double f,
                                   const nsdf::ErrorBounds& bounds,
                                   double alpha0_gain);

/**
 * Circulation row over (v_s, sigma): T·v_s - sigma ≥ rhs, with T = Omega
 * grad_f and rhs = upsilon(f - e_h). Pushes tangentially near the surface
 * so the filtered velocity cannot die in a local trap.
 */
struct CirculationRow {
  Eigen::Vector3d T = Eigen::Vector3d::Zero();
  double rhs = 0.0;
};

CirculationRow circulation_row(const Eigen::Vector3d& grad_f, double f,
                               const Eigen::Matrix3d& Omega, double upsilon_c0,
                               double upsilon_slope, double e_h);

/**
 * The quadratic cone program over x = (v_s, sigma) solved by safe_velocity:
 * minimize ½‖v_s - v_c‖² + p sigma² subject to the robust safety row (a
 * linear half-space when e_grad_h = 0), the circulation row when with_ci,
 * and per-axis bounds |v_s,i| ≤ v_max.
 */
socp::ConeProgram build_safe_velocity_program(const Eigen::Vector3d& v_c,
                                              const FieldSample& sample,
                                              const GuidanceConfig& cfg,
                                              bool with_ci);

/**
 * Safe velocity filter: projects the nominal velocity onto the constraint
 * set. Solver failure is not an error; the always-feasible rest point
 * v_s = 0 with least-norm sigma is returned with fallback_used set.
 */
SafeVelocityResult safe_velocity(const Eigen::Vector3d& r,
                                 const Eigen::Vector3d& r_d,
                                 const FieldEvaluator& field,
                                 const GuidanceConfig& cfg, bool with_ci,
                                 const Eigen::VectorXd* warm = nullptr);

enum class JacobianMethod { finite_diff, nominal_only };

struct JacobianResult {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  JacobianMethod method_used = JacobianMethod::nominal_only;
  /// Set when a perturbed solve changed its active set or fell back; the
  /// finite-difference estimate is unreliable there and J holds the
  /// nominal-velocity Jacobian instead.
  bool discontinuity = false;
};

/**
 * Jacobian of the safe velocity with respect to position. finite_diff uses
 * central differences with a 1e-4 m step (six perturbed solves);
 * nominal_only returns the analytic Jacobian of the nominal velocity,
 * -(v_max/k_p) diag(sech²(r_e/k_p)).
 */
JacobianResult jacobian_vs(const Eigen::Vector3d& r, const Eigen::Vector3d& r_d,
                           const FieldEvaluator& field,
                           const GuidanceConfig& cfg, bool with_ci,
                           JacobianMethod method);

}  // namespace sdfprox::guidance
