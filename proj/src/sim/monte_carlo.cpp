#include "sdfprox/sim/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "sdfprox/common/rng.hpp"

namespace sdfprox::sim {

namespace {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * (static_cast<double>(values.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

struct RunResult {
  RunSummary summary;
  std::vector<double> solve_times;  // only filled when timing is recorded
};

RunResult execute_run(const ScenarioConfig& base, const TargetRuntime& target,
                      const MonteCarloParams& params, int run_index,
                      const RunSink& on_run) {
  ScenarioConfig cfg = base;
  cfg.seed = base.seed + static_cast<std::uint64_t>(run_index);

  Rng rng(cfg.seed);
  int resamples = 0;
  Eigen::Vector3d r0 = rng.uniform_box(params.box_lo, params.box_hi);
  while (!(target.field(r0).value >= target.bounds.e_h)) {
    if (++resamples > params.max_resamples) {
      throw std::runtime_error(
          "monte_carlo: could not draw a clearance-respecting start after " +
          std::to_string(params.max_resamples) + " tries");
    }
    r0 = rng.uniform_box(params.box_lo, params.box_hi);
  }
  cfg.r0 = r0;

  RunLog log = run_episode(cfg, target);
  if (on_run) on_run(run_index, log);

  RunResult out;
  out.summary.run_index = run_index;
  out.summary.seed = cfg.seed;
  out.summary.r0 = r0;
  out.summary.min_h = log.min_h;
  out.summary.min_h_true = log.min_h_true;
  out.summary.final_re = log.final_re;
  out.summary.max_v_inf = log.max_v_inf;
  out.summary.max_solve_time = log.max_solve_time;
  out.summary.outcome = log.outcome;
  out.summary.resamples = resamples;
  if (base.record_timing) {
    out.solve_times.reserve(log.records.size());
    for (const RunRecord& rec : log.records) out.solve_times.push_back(rec.solve_time);
  }
  return out;
}

}  // namespace

MonteCarloReport monte_carlo(const ScenarioConfig& base,
                             const MonteCarloParams& params, const RunSink& on_run) {
  base.validate();
  params.validate();
  const TargetRuntime target = resolve_target(base);

  std::vector<RunResult> results(static_cast<std::size_t>(params.n_runs));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= params.n_runs) return;
      try {
        results[static_cast<std::size_t>(i)] =
            execute_run(base, target, params, i, on_run);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int n_workers = std::min(params.parallelism, params.n_runs);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  MonteCarloReport report;
  report.runs.reserve(results.size());
  report.min_h_overall = std::numeric_limits<double>::infinity();
  double min_true = std::numeric_limits<double>::infinity();
  bool any_true = false;
  std::vector<double> all_solve_times;
  for (const RunResult& res : results) {
    report.runs.push_back(res.summary);
    switch (res.summary.outcome) {
      case Outcome::converged:
        ++report.n_converged;
        break;
      case Outcome::stalled:
        ++report.n_stalled;
        break;
      case Outcome::unsafe:
        ++report.n_unsafe;
        break;
      case Outcome::aborted:
        ++report.n_aborted;
        break;
    }
    report.min_h_overall = std::min(report.min_h_overall, res.summary.min_h);
    if (!std::isnan(res.summary.min_h_true)) {
      any_true = true;
      min_true = std::min(min_true, res.summary.min_h_true);
    }
    all_solve_times.insert(all_solve_times.end(), res.solve_times.begin(),
                           res.solve_times.end());
  }
  report.min_h_true_overall =
      any_true ? min_true : std::numeric_limits<double>::quiet_NaN();
  if (!all_solve_times.empty()) {
    report.solve_p50 = percentile(all_solve_times, 0.5);
    report.solve_p95 = percentile(all_solve_times, 0.95);
    report.solve_max = *std::max_element(all_solve_times.begin(), all_solve_times.end());
  }
  return report;
}

std::string report_json(const MonteCarloReport& report, const ScenarioConfig& base,
                        const MonteCarloParams& params) {
  nlohmann::json j;
  j["meta"] = scenario_meta(base);
  j["montecarlo"]["n_runs"] = params.n_runs;
  j["montecarlo"]["box_lo"] = {params.box_lo(0), params.box_lo(1), params.box_lo(2)};
  j["montecarlo"]["box_hi"] = {params.box_hi(0), params.box_hi(1), params.box_hi(2)};
  j["aggregates"]["n_converged"] = report.n_converged;
  j["aggregates"]["n_stalled"] = report.n_stalled;
  j["aggregates"]["n_unsafe"] = report.n_unsafe;
  j["aggregates"]["n_aborted"] = report.n_aborted;
  j["aggregates"]["min_h_overall"] = report.min_h_overall;
  j["aggregates"]["min_h_true_overall"] = report.min_h_true_overall;
  j["aggregates"]["solve_p50"] = report.solve_p50;
  j["aggregates"]["solve_p95"] = report.solve_p95;
  j["aggregates"]["solve_max"] = report.solve_max;
  nlohmann::json runs = nlohmann::json::array();
  for (const RunSummary& run : report.runs) {
    nlohmann::json r;
    r["run_index"] = run.run_index;
    r["seed"] = run.seed;
    r["r0"] = {run.r0(0), run.r0(1), run.r0(2)};
    r["min_h"] = run.min_h;
    r["min_h_true"] = run.min_h_true;
    r["final_re"] = run.final_re;
    r["max_v_inf"] = run.max_v_inf;
    r["max_solve_time"] = run.max_solve_time;
    r["outcome"] = to_string(run.outcome);
    r["resamples"] = run.resamples;
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);
  return j.dump(2) + "\n";
}

}  // namespace sdfprox::sim
