#include "sdfprox/guidance/safe_velocity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdfprox/socp/solver.hpp"

namespace sdfprox::guidance {

namespace {

constexpr double kActiveTolerance = 1e-6;

ActiveConstraints classify_active(const Eigen::Vector3d& v_s, double sigma,
                                  const FieldSample& sample,
                                  const GuidanceConfig& cfg, bool with_ci) {
  ActiveConstraints flags;
  const double box_tol = kActiveTolerance * (1.0 + cfg.v_max);
  for (int i = 0; i < 3; ++i) {
    flags.box_upper[i] = std::abs(v_s(i) - cfg.v_max) <= box_tol;
    flags.box_lower[i] = std::abs(v_s(i) + cfg.v_max) <= box_tol;
  }

  const double d = cfg.alpha0(sample.value - cfg.bounds.e_h);
  const double cbf_scale = 1.0 + std::abs(d) + sample.gradient.norm();
  const double cbf_residual =
      sample.gradient.dot(v_s) + d - cfg.bounds.e_grad_h * v_s.norm();
  flags.cbf = std::abs(cbf_residual) <= kActiveTolerance * cbf_scale;

  if (with_ci) {
    const CirculationRow row =
        circulation_row(sample.gradient, sample.value, cfg.Omega,
                        cfg.upsilon_c0, cfg.upsilon_slope, cfg.bounds.e_h);
    const double ci_scale = 1.0 + std::abs(row.rhs) + row.T.norm();
    const double ci_residual = row.T.dot(v_s) - sigma - row.rhs;
    flags.circulation = std::abs(ci_residual) <= kActiveTolerance * ci_scale;
  }
  return flags;
}

}  // namespace

void GuidanceConfig::validate() const {
  if (!(v_max > 0.0) || !(k_p > 0.0) || !(alpha0_gain > 0.0) || !(p > 0.0)) {
    throw std::invalid_argument(
        "GuidanceConfig: v_max, k_p, alpha0_gain, p must all be > 0");
  }
  if (!(upsilon_c0 > 0.0) || !(upsilon_slope > 0.0)) {
    throw std::invalid_argument(
        "GuidanceConfig: upsilon must be positive at zero and strictly "
        "decreasing");
  }
  if (!Omega.allFinite() || !std::isfinite(bounds.e_h) ||
      !std::isfinite(bounds.e_grad_h)) {
    throw std::invalid_argument("GuidanceConfig: non-finite entries");
  }
}

Eigen::Vector3d nominal_velocity(const Eigen::Vector3d& r,
                                 const Eigen::Vector3d& r_d, double v_max,
                                 double k_p) {
  Eigen::Vector3d v_c;
  for (int i = 0; i < 3; ++i) {
    v_c(i) = -v_max * std::tanh((r(i) - r_d(i)) / k_p);
  }
  return v_c;
}

socp::SocConstraint robust_cbf_row(const Eigen::Vector3d& grad_f, double f,
                                   const nsdf::ErrorBounds& bounds,
                                   double alpha0_gain) {
  socp::SocConstraint row;
  row.A = bounds.e_grad_h * Eigen::Matrix3d::Identity();
  row.b = Eigen::Vector3d::Zero();
  row.c = grad_f;
  row.d = alpha0_gain * (f - bounds.e_h);
  return row;
}

CirculationRow circulation_row(const Eigen::Vector3d& grad_f, double f,
                               const Eigen::Matrix3d& Omega, double upsilon_c0,
                               double upsilon_slope, double e_h) {
  CirculationRow row;
  row.T = Omega * grad_f;
  row.rhs = upsilon_c0 - upsilon_slope * (f - e_h);
  return row;
}

socp::ConeProgram build_safe_velocity_program(const Eigen::Vector3d& v_c,
                                              const FieldSample& sample,
                                              const GuidanceConfig& cfg,
                                              bool with_ci) {
  socp::ConeProgram prog;
  prog.Q = Eigen::Matrix4d::Identity();
  prog.Q(3, 3) = 2.0 * cfg.p;
  prog.q = Eigen::Vector4d::Zero();
  prog.q.head<3>() = -v_c;

  const socp::SocConstraint cbf =
      robust_cbf_row(sample.gradient, sample.value, cfg.bounds,
                     cfg.alpha0_gain);

  Eigen::Index linear_rows = 6;  // per-axis box, both signs
  const bool degenerate_cbf = cfg.bounds.e_grad_h == 0.0;
  if (degenerate_cbf) {
    linear_rows += 1;
  } else {
    socp::SocConstraint padded;
    padded.A = Eigen::MatrixXd::Zero(3, 4);
    padded.A.leftCols<3>() = cbf.A;
    padded.b = cbf.b;
    padded.c = Eigen::Vector4d::Zero();
    padded.c.head<3>() = cbf.c;
    padded.d = cbf.d;
    prog.soc_constraints.push_back(std::move(padded));
  }
  if (with_ci) {
    linear_rows += 1;
  }

  prog.G = Eigen::MatrixXd::Zero(linear_rows, 4);
  prog.h = Eigen::VectorXd::Zero(linear_rows);
  Eigen::Index row = 0;
  if (degenerate_cbf) {
    prog.G.row(row).head<3>() = -cbf.c.transpose();
    prog.h(row) = cbf.d;
    ++row;
  }
  if (with_ci) {
    const CirculationRow ci =
        circulation_row(sample.gradient, sample.value, cfg.Omega,
                        cfg.upsilon_c0, cfg.upsilon_slope, cfg.bounds.e_h);
    prog.G.row(row).head<3>() = -ci.T.transpose();
    prog.G(row, 3) = 1.0;
    prog.h(row) = -ci.rhs;
    ++row;
  }
  prog.G.block<3, 3>(row, 0) = Eigen::Matrix3d::Identity();
  prog.h.segment<3>(row).setConstant(cfg.v_max);
  prog.G.block<3, 3>(row + 3, 0) = -Eigen::Matrix3d::Identity();
  prog.h.segment<3>(row + 3).setConstant(cfg.v_max);
  return prog;
}

SafeVelocityResult safe_velocity(const Eigen::Vector3d& r,
                                 const Eigen::Vector3d& r_d,
                                 const FieldEvaluator& field,
                                 const GuidanceConfig& cfg, bool with_ci,
                                 const Eigen::VectorXd* warm) {
  cfg.validate();
  const FieldSample sample = field(r);
  const Eigen::Vector3d v_c = nominal_velocity(r, r_d, cfg.v_max, cfg.k_p);
  const socp::ConeProgram prog =
      build_safe_velocity_program(v_c, sample, cfg, with_ci);

  socp::ConeSolver solver;
  const socp::ConeSolution sol = solver.solve(prog, warm);

  SafeVelocityResult result;
  result.solver_status = sol.status;
  result.solve_time = sol.solve_time;

  bool usable = sol.status == socp::SolveStatus::optimal;
  if (usable) {
    const Eigen::Vector3d v_s = sol.x.head<3>();
    usable = v_s.lpNorm<Eigen::Infinity>() <= cfg.v_max + 1e-9;
    if (usable) {
      result.v_s = v_s;
      result.sigma = sol.x(3);
    }
  }
  if (!usable) {
    // Always-feasible rest point: zero velocity with the least-norm sigma
    // satisfying the circulation row.
    result.v_s = Eigen::Vector3d::Zero();
    result.sigma =
        with_ci
            ? std::min(0.0, -cfg.upsilon(sample.value - cfg.bounds.e_h))
            : 0.0;
    result.fallback_used = true;
  }
  result.active_constraints =
      classify_active(result.v_s, result.sigma, sample, cfg, with_ci);
  return result;
}

JacobianResult jacobian_vs(const Eigen::Vector3d& r, const Eigen::Vector3d& r_d,
                           const FieldEvaluator& field,
                           const GuidanceConfig& cfg, bool with_ci,
                           JacobianMethod method) {
  JacobianResult result;
  Eigen::Matrix3d nominal = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    const double c = std::cosh((r(i) - r_d(i)) / cfg.k_p);
    nominal(i, i) = -(cfg.v_max / cfg.k_p) / (c * c);
  }
  if (method == JacobianMethod::nominal_only) {
    result.J = nominal;
    result.method_used = JacobianMethod::nominal_only;
    return result;
  }

  const SafeVelocityResult base = safe_velocity(r, r_d, field, cfg, with_ci);
  Eigen::VectorXd warm(4);
  warm.head<3>() = base.v_s;
  warm(3) = base.sigma;

  const double step = 1e-4;
  Eigen::Matrix3d J;
  bool discontinuity = base.fallback_used;
  for (int i = 0; i < 3 && !discontinuity; ++i) {
    Eigen::Vector3d r_plus = r;
    Eigen::Vector3d r_minus = r;
    r_plus(i) += step;
    r_minus(i) -= step;
    const SafeVelocityResult plus =
        safe_velocity(r_plus, r_d, field, cfg, with_ci, &warm);
    const SafeVelocityResult minus =
        safe_velocity(r_minus, r_d, field, cfg, with_ci, &warm);
    if (plus.fallback_used || minus.fallback_used ||
        !(plus.active_constraints == base.active_constraints) ||
        !(minus.active_constraints == base.active_constraints)) {
      discontinuity = true;
      break;
    }
    J.col(i) = (plus.v_s - minus.v_s) / (2.0 * step);
  }

  if (discontinuity) {
    result.J = nominal;
    result.method_used = JacobianMethod::nominal_only;
    result.discontinuity = true;
  } else {
    result.J = J;
    result.method_used = JacobianMethod::finite_diff;
  }
  return result;
}

}  // namespace sdfprox::guidance
