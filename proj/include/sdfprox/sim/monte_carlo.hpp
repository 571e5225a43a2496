#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdfprox/sim/episode.hpp"
#include "sdfprox/sim/scenario.hpp"

namespace sdfprox::sim {

struct RunSummary {
  int run_index = 0;
  std::uint64_t seed = 0;
  Eigen::Vector3d r0 = Eigen::Vector3d::Zero();
  double min_h = 0.0;
  double min_h_true = 0.0;
  double final_re = 0.0;
  double max_v_inf = 0.0;
  double max_solve_time = 0.0;
  Outcome outcome = Outcome::stalled;
  int resamples = 0;  ///< start positions rejected for violating clearance
};

struct MonteCarloReport {
  std::vector<RunSummary> runs;  ///< always ordered by run_index
  int n_converged = 0;
  int n_stalled = 0;
  int n_unsafe = 0;
  int n_aborted = 0;
  double min_h_overall = 0.0;
  double min_h_true_overall = 0.0;
  /// Wall-clock per-step compute percentiles across all runs; all zero
  /// unless the scenario records timing.
  double solve_p50 = 0.0;
  double solve_p95 = 0.0;
  double solve_max = 0.0;
};

/// Called from worker threads once per finished run; must be thread-safe.
/// run_index identifies the episode; the log is complete when handed over.
using RunSink = std::function<void(int run_index, const RunLog& log)>;

/**
 * Monte-Carlo campaign over randomized starts. Run i draws its start from
 * an Rng seeded with base.seed + i, resampling (and counting) draws that
 * violate the certified clearance. Episodes are independent and the report
 * is assembled in run order, so the result is byte-identical for any
 * parallelism, including 1.
 */
MonteCarloReport monte_carlo(const ScenarioConfig& base,
                             const MonteCarloParams& params,
                             const RunSink& on_run = {});

/// JSON rendering of the report with the resolved base config echoed under
/// "meta" and the campaign shape under "montecarlo".
std::string report_json(const MonteCarloReport& report,
                        const ScenarioConfig& base,
                        const MonteCarloParams& params);

}  // namespace sdfprox::sim
