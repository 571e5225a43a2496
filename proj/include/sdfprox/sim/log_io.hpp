#pragma once

#include <string>
#include <vector>

#include "sdfprox/sim/episode.hpp"

namespace sdfprox::sim {

/// Column names of the flat per-step schema, in file order (32 columns).
const std::vector<std::string>& run_log_columns();

/// Flatten one record into file order; size matches run_log_columns().
std::vector<double> record_values(const RunRecord& rec);

/**
 * CSV rendering: "# key = value" comment lines (the config echo, then
 * outcome and abort_reason), one header row, then one row per control step
 * with every number at full double precision (17 significant digits).
 * An empty log renders as comments plus the header row only.
 */
std::string run_log_csv(const RunLog& log);

/// JSON mirror of the same content: {"meta", "outcome", "abort_reason",
/// "columns", "records"}. Non-finite numbers appear as null (JSON has no
/// NaN), so the CSV is the canonical round-trip format.
std::string run_log_json(const RunLog& log);

/// Inverse of run_log_csv. Aggregates are recomputed from the parsed
/// records; throws std::runtime_error on malformed input.
RunLog parse_run_log_csv(const std::string& text);

}  // namespace sdfprox::sim
