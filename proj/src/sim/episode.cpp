#include "sdfprox/sim/episode.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sdfprox/common/io_util.hpp"
#include "sdfprox/control/observer.hpp"
#include "sdfprox/dynamics/disturbance.hpp"

namespace sdfprox::sim {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::converged:
      return "converged";
    case Outcome::stalled:
      return "stalled";
    case Outcome::unsafe:
      return "unsafe";
    case Outcome::aborted:
      return "aborted";
  }
  return "unknown";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "converged") return Outcome::converged;
  if (s == "stalled") return Outcome::stalled;
  if (s == "unsafe") return Outcome::unsafe;
  if (s == "aborted") return Outcome::aborted;
  throw std::runtime_error("unknown outcome '" + s + "'");
}

void RunLog::finalize_aggregates(double v_max, const Eigen::Vector3d& r_d) {
  min_h = std::numeric_limits<double>::infinity();
  double min_true = std::numeric_limits<double>::infinity();
  bool any_true = false;
  max_v_inf = 0.0;
  max_solve_time = 0.0;
  n_velocity_exceedances = 0;
  for (const RunRecord& rec : records) {
    min_h = std::min(min_h, rec.h);
    if (!std::isnan(rec.h_true)) {
      any_true = true;
      min_true = std::min(min_true, rec.h_true);
    }
    const double v_inf = rec.v.cwiseAbs().maxCoeff();
    max_v_inf = std::max(max_v_inf, v_inf);
    if (v_inf > v_max) ++n_velocity_exceedances;
    max_solve_time = std::max(max_solve_time, rec.solve_time);
  }
  min_h_true = any_true ? min_true : std::numeric_limits<double>::quiet_NaN();
  final_re = records.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : (records.back().r - r_d).norm();
}

namespace {

/// Joint integration state: chaser position/velocity, target true anomaly
/// and (when the observer runs) the estimator internal state. Everything
/// advances in one Runge-Kutta scheme so the observer sees stage-consistent
/// plant values instead of a zero-order-hold approximation.
struct AugState {
  Eigen::Vector3d r;
  Eigen::Vector3d v;
  double f_theta = 0.0;
  Eigen::VectorXd z;  // empty when the observer is off

  bool finite() const {
    return r.allFinite() && v.allFinite() && std::isfinite(f_theta) && z.allFinite();
  }
};

struct AugDeriv {
  Eigen::Vector3d r_dot;
  Eigen::Vector3d v_dot;
  double f_dot = 0.0;
  Eigen::VectorXd z_dot;
};

AugState stage_state(const AugState& x, double scale, const AugDeriv& k,
                     bool with_observer) {
  AugState s;
  s.r = x.r + scale * k.r_dot;
  s.v = x.v + scale * k.v_dot;
  s.f_theta = x.f_theta + scale * k.f_dot;
  if (with_observer) s.z = x.z + scale * k.z_dot;
  return s;
}

class Integrator {
 public:
  Integrator(const ScenarioConfig& cfg, const control::ObserverState& obs)
      : orbit_template_(cfg.orbit),
        chaser_(cfg.chaser),
        options_(cfg.dynamics_options),
        disturbance_(cfg.disturbance),
        obs_(obs),
        with_observer_(cfg.observer.enabled) {}

  AugDeriv derivative(const AugState& x, double t_abs, const Eigen::Vector3d& F) const {
    dynamics::OrbitState orbit = orbit_template_;
    orbit.f_theta = x.f_theta;
    const Eigen::Vector3d d = dynamics::disturbance_signal(disturbance_, t_abs);
    AugDeriv out;
    out.r_dot = x.v;
    out.v_dot = dynamics::relative_accel({x.r, x.v}, orbit, F, d, chaser_, options_);
    out.f_dot = dynamics::true_anomaly_rates(orbit).f_dot;
    if (with_observer_) {
      const dynamics::FrameMatrices fm = dynamics::frame_matrices(orbit);
      const Eigen::Vector3d g =
          options_.gravity_sign *
          dynamics::differential_gravity(orbit, x.r, options_.gravity_mode);
      const control::PlantSample sample{x.r, x.v, {fm.C1, fm.C2, g}, F};
      out.z_dot = control::observer_derivative(obs_, x.z, sample, chaser_.m);
    }
    return out;
  }

  /// One classical fourth-order Runge-Kutta step of length h starting at
  /// absolute time t_abs, thrust held constant.
  AugState rk4(const AugState& x, double t_abs, double h, const Eigen::Vector3d& F) const {
    const AugDeriv k1 = derivative(x, t_abs, F);
    const AugDeriv k2 = derivative(stage_state(x, 0.5 * h, k1, with_observer_),
                                   t_abs + 0.5 * h, F);
    const AugDeriv k3 = derivative(stage_state(x, 0.5 * h, k2, with_observer_),
                                   t_abs + 0.5 * h, F);
    const AugDeriv k4 = derivative(stage_state(x, h, k3, with_observer_), t_abs + h, F);
    AugState out;
    out.r = x.r + (h / 6.0) * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot);
    out.v = x.v + (h / 6.0) * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
    out.f_theta =
        x.f_theta + (h / 6.0) * (k1.f_dot + 2.0 * k2.f_dot + 2.0 * k3.f_dot + k4.f_dot);
    if (with_observer_) {
      out.z = x.z + (h / 6.0) * (k1.z_dot + 2.0 * k2.z_dot + 2.0 * k3.z_dot + k4.z_dot);
    }
    return out;
  }

 private:
  dynamics::OrbitState orbit_template_;
  dynamics::ChaserParams chaser_;
  dynamics::DynamicsOptions options_;
  dynamics::DisturbanceModel disturbance_;
  const control::ObserverState& obs_;
  bool with_observer_;
};

int encode_status(const guidance::SafeVelocityResult& res) {
  return static_cast<int>(res.solver_status) + (res.fallback_used ? 10 : 0);
}

}  // namespace

RunLog run_episode(const ScenarioConfig& cfg, const TargetRuntime& target) {
  cfg.validate();

  guidance::GuidanceConfig gcfg = cfg.guidance;
  gcfg.bounds = target.bounds;
  const double m = cfg.chaser.m;

  const guidance::FieldSample start = target.field(cfg.r0);
  if (!(start.value >= target.bounds.e_h)) {
    std::ostringstream msg;
    msg << "scenario '" << cfg.name << "': start violates the certified clearance: f(r0) = "
        << start.value << " < e_h = " << target.bounds.e_h;
    throw std::invalid_argument(msg.str());
  }

  control::ObserverState obs;
  if (cfg.observer.enabled) {
    obs = control::observer_init(cfg.observer.A, cfg.observer.C, cfg.observer.L,
                                 {cfg.r0, cfg.v0}, m);
  }

  RunLog log;
  log.meta = scenario_meta(cfg);
  log.meta["resolved.e_h"] = format_g17(target.bounds.e_h);
  log.meta["resolved.e_grad_h"] = format_g17(target.bounds.e_grad_h);

  const int n_steps = cfg.control_steps();
  const int substeps = cfg.substeps_per_control();
  log.records.reserve(static_cast<std::size_t>(n_steps) + 1);

  const Integrator integrator(cfg, obs);
  AugState x{cfg.r0, cfg.v0, cfg.orbit.f_theta, obs.z};

  Eigen::VectorXd warm;
  bool have_warm = false;
  bool aborted = false;

  // Two-rate loop. The cone program and its position Jacobian update once
  // per control period; the smooth feedback law is a continuous-time design
  // (its lambda/2 velocity gain is far too stiff to hold over a full
  // control period), so the force is refreshed from the current state at
  // every physics substep while v_s and J_vs stay frozen.
  const auto feedback = [&](const AugState& at, const Eigen::Vector3d& v_s,
                            const Eigen::Matrix3d& J) {
    dynamics::OrbitState orbit_now = cfg.orbit;
    orbit_now.f_theta = at.f_theta;
    const dynamics::FrameMatrices fm = dynamics::frame_matrices(orbit_now);
    const control::PlantCoefficients coeffs{
        fm.C1, fm.C2,
        cfg.dynamics_options.gravity_sign *
            dynamics::differential_gravity(orbit_now, at.r,
                                           cfg.dynamics_options.gravity_mode)};
    const guidance::FieldSample sample = target.field(at.r);
    return control::safe_control({at.r, at.v}, cfg.r_d, v_s, J, obs, sample,
                                 target.bounds, coeffs, cfg.control, m);
  };

  for (int k = 0; k <= n_steps; ++k) {
    const double t = k * cfg.control_period;
    const dynamics::RelState state{x.r, x.v};

    std::chrono::steady_clock::time_point tic;
    if (cfg.record_timing) tic = std::chrono::steady_clock::now();

    const guidance::FieldSample sample = target.field(state.r);
    const guidance::SafeVelocityResult vel = guidance::safe_velocity(
        state.r, cfg.r_d, target.field, gcfg, cfg.with_ci, have_warm ? &warm : nullptr);
    const guidance::JacobianResult jac =
        guidance::jacobian_vs(state.r, cfg.r_d, target.field, gcfg, cfg.with_ci,
                              guidance::JacobianMethod::finite_diff);
    const control::SafeControlResult ctrl = feedback(x, vel.v_s, jac.J);

    double compute_time = 0.0;
    if (cfg.record_timing) {
      compute_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    }

    RunRecord rec;
    rec.t = t;
    rec.r = state.r;
    rec.v = state.v;
    rec.v_c = guidance::nominal_velocity(state.r, cfg.r_d, gcfg.v_max, gcfg.k_p);
    rec.v_s = vel.v_s;
    rec.sigma = vel.sigma;
    rec.F = ctrl.F;
    rec.d = dynamics::disturbance_signal(cfg.disturbance, t);
    rec.d_hat = obs.d_hat;
    rec.h = sample.value - target.bounds.e_h;
    rec.h_true = target.truth ? target.truth(state.r).value
                              : std::numeric_limits<double>::quiet_NaN();
    rec.h1 = control::barrier_h1(rec.h, state, vel.v_s, rec.d - rec.d_hat, cfg.control);
    rec.V0 = control::lyapunov_v0(state.r - cfg.r_d, cfg.control);
    rec.V1 = control::lyapunov_v1(state.r - cfg.r_d, state.v, vel.v_s, cfg.control);
    rec.lambda = ctrl.telemetry.lambda;
    rec.solver_status = encode_status(vel);
    rec.saturated = ctrl.telemetry.saturated ? 1 : 0;

    if (k == n_steps) {
      rec.solve_time = compute_time;
      log.records.push_back(rec);
      break;
    }

    warm.resize(4);
    warm.head<3>() = vel.v_s;
    warm(3) = vel.sigma;
    have_warm = true;

    Eigen::Vector3d F = ctrl.F;
    for (int s = 0; s < substeps && !aborted; ++s) {
      if (s > 0) {
        std::chrono::steady_clock::time_point sub_tic;
        if (cfg.record_timing) sub_tic = std::chrono::steady_clock::now();
        F = feedback(x, vel.v_s, jac.J).F;
        if (cfg.record_timing) {
          compute_time += std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - sub_tic)
                              .count();
        }
      }
      const double t_sub = t + s * cfg.physics_dt;
      x = integrator.rk4(x, t_sub, cfg.physics_dt, F);
      if (!x.finite()) {
        aborted = true;
        std::ostringstream msg;
        msg << "state became non-finite at t = " << t_sub + cfg.physics_dt;
        log.abort_reason = msg.str();
      }
      if (cfg.observer.enabled && !aborted) {
        obs.z = x.z;
        obs.xi_hat = obs.z + obs.L * x.v;
        obs.d_hat = obs.C * obs.xi_hat;
      }
    }

    rec.solve_time = compute_time;
    log.records.push_back(rec);
    if (aborted) break;
  }

  log.finalize_aggregates(gcfg.v_max, cfg.r_d);
  const double min_clearance = target.truth ? log.min_h_true : log.min_h;
  if (min_clearance < 0.0) {
    log.outcome = Outcome::unsafe;
  } else if (aborted) {
    log.outcome = Outcome::aborted;
  } else if (log.final_re <= cfg.converge_tol) {
    log.outcome = Outcome::converged;
  } else {
    log.outcome = Outcome::stalled;
  }
  return log;
}

RunLog run_episode(const ScenarioConfig& cfg) {
  return run_episode(cfg, resolve_target(cfg));
}

}  // namespace sdfprox::sim
