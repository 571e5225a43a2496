#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdfprox/sim/scenario.hpp"

namespace sdfprox::sim {

/**
 * Telemetry captured once per control step, before the interval is
 * integrated. h is the conservative clearance (field value minus the
 * certified margin), h_true the oracle clearance (NaN when no oracle is
 * available), h1 the velocity- and estimation-augmented barrier, V0/V1 the
 * tracking Lyapunov pair. solver_status encodes the cone solve: 0 optimal,
 * 1 infeasible, 2 iteration limit, 3 numerical failure, +10 when the
 * rest-point fallback replaced the answer. solve_time is the wall-clock
 * compute for the whole step (field + filter + Jacobian + controller) and
 * stays 0 unless record_timing is on.
 */
struct RunRecord {
  double t = 0.0;
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_c = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_s = Eigen::Vector3d::Zero();
  double sigma = 0.0;
  Eigen::Vector3d F = Eigen::Vector3d::Zero();
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  Eigen::Vector3d d_hat = Eigen::Vector3d::Zero();
  double h = 0.0;
  double h_true = std::numeric_limits<double>::quiet_NaN();
  double h1 = 0.0;
  double V0 = 0.0;
  double V1 = 0.0;
  double lambda = 0.0;
  int solver_status = 0;
  double solve_time = 0.0;
  int saturated = 0;
};

enum class Outcome { converged, stalled, unsafe, aborted };
const char* to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& s);

struct RunLog {
  std::vector<RunRecord> records;
  /// Resolved-config echo written as "# key = value" lines ahead of the CSV
  /// header. Sorted map, so export is deterministic.
  std::map<std::string, std::string> meta;

  Outcome outcome = Outcome::stalled;
  std::string abort_reason;

  // Aggregates over records (recomputed by finalize_aggregates).
  double min_h = std::numeric_limits<double>::infinity();
  double min_h_true = std::numeric_limits<double>::quiet_NaN();
  double final_re = std::numeric_limits<double>::quiet_NaN();
  double max_v_inf = 0.0;
  double max_solve_time = 0.0;
  int n_velocity_exceedances = 0;  ///< steps with ||v||_inf > v_max (logged,
                                   ///< never an error: the bound is soft)

  /// Recompute the aggregate fields from `records`; v_max feeds the
  /// exceedance counter, r_d the final position error.
  void finalize_aggregates(double v_max, const Eigen::Vector3d& r_d);
};

/**
 * Run one closed-loop episode. Per control step: evaluate the clearance
 * field, filter the nominal velocity (second-order cone program), estimate
 * its position Jacobian, form the applied force, then hold the force while
 * plant, true anomaly and observer advance jointly by classical
 * fourth-order Runge-Kutta at the physics step. The function is
 * deterministic in the config. Throws std::invalid_argument when the start
 * violates the certified clearance f(r0) >= e_h; a state that stops being
 * finite ends the run with Outcome::aborted instead of throwing.
 */
RunLog run_episode(const ScenarioConfig& cfg, const TargetRuntime& target);

/// Convenience overload that resolves the target itself.
RunLog run_episode(const ScenarioConfig& cfg);

}  // namespace sdfprox::sim
