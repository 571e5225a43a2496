#include "sdfprox/sim/log_io.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "sdfprox/common/io_util.hpp"

namespace sdfprox::sim {

const std::vector<std::string>& run_log_columns() {
  static const std::vector<std::string> columns = {
      "t",    "rx",    "ry",     "rz",     "vx",     "vy",       "vz",
      "vcx",  "vcy",   "vcz",    "vsx",    "vsy",    "vsz",      "sigma",
      "Fx",   "Fy",    "Fz",     "dx",     "dy",     "dz",       "dhx",
      "dhy",  "dhz",   "h",      "h_true", "h1",     "V0",       "V1",
      "lambda", "solver_status", "solve_time", "saturated"};
  return columns;
}

std::vector<double> record_values(const RunRecord& rec) {
  std::vector<double> out;
  out.reserve(run_log_columns().size());
  out.push_back(rec.t);
  for (int i = 0; i < 3; ++i) out.push_back(rec.r(i));
  for (int i = 0; i < 3; ++i) out.push_back(rec.v(i));
  for (int i = 0; i < 3; ++i) out.push_back(rec.v_c(i));
  for (int i = 0; i < 3; ++i) out.push_back(rec.v_s(i));
  out.push_back(rec.sigma);
  for (int i = 0; i < 3; ++i) out.push_back(rec.F(i));
  for (int i = 0; i < 3; ++i) out.push_back(rec.d(i));
  for (int i = 0; i < 3; ++i) out.push_back(rec.d_hat(i));
  out.push_back(rec.h);
  out.push_back(rec.h_true);
  out.push_back(rec.h1);
  out.push_back(rec.V0);
  out.push_back(rec.V1);
  out.push_back(rec.lambda);
  out.push_back(static_cast<double>(rec.solver_status));
  out.push_back(rec.solve_time);
  out.push_back(static_cast<double>(rec.saturated));
  return out;
}

namespace {

RunRecord record_from_values(const std::vector<double>& v) {
  if (v.size() != run_log_columns().size()) {
    throw std::runtime_error("log row has " + std::to_string(v.size()) +
                             " values, expected " +
                             std::to_string(run_log_columns().size()));
  }
  RunRecord rec;
  std::size_t i = 0;
  rec.t = v[i++];
  for (int k = 0; k < 3; ++k) rec.r(k) = v[i++];
  for (int k = 0; k < 3; ++k) rec.v(k) = v[i++];
  for (int k = 0; k < 3; ++k) rec.v_c(k) = v[i++];
  for (int k = 0; k < 3; ++k) rec.v_s(k) = v[i++];
  rec.sigma = v[i++];
  for (int k = 0; k < 3; ++k) rec.F(k) = v[i++];
  for (int k = 0; k < 3; ++k) rec.d(k) = v[i++];
  for (int k = 0; k < 3; ++k) rec.d_hat(k) = v[i++];
  rec.h = v[i++];
  rec.h_true = v[i++];
  rec.h1 = v[i++];
  rec.V0 = v[i++];
  rec.V1 = v[i++];
  rec.lambda = v[i++];
  rec.solver_status = static_cast<int>(v[i++]);
  rec.solve_time = v[i++];
  rec.saturated = static_cast<int>(v[i++]);
  return rec;
}

std::string join_columns() {
  const auto& cols = run_log_columns();
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  return line;
}

/// Parse "[a, b, c]" produced by the meta writer.
bool parse_vec3_string(const std::string& s, Eigen::Vector3d* out) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') return false;
  std::stringstream ss(s.substr(1, s.size() - 2));
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= 3) return false;
    (*out)(i++) = std::strtod(item.c_str(), nullptr);
  }
  return i == 3;
}

}  // namespace

std::string run_log_csv(const RunLog& log) {
  std::string out;
  for (const auto& [key, value] : log.meta) {
    out += "# " + key + " = " + value + "\n";
  }
  out += "# outcome = " + std::string(to_string(log.outcome)) + "\n";
  if (!log.abort_reason.empty()) {
    out += "# abort_reason = " + log.abort_reason + "\n";
  }
  out += join_columns() + "\n";
  for (const RunRecord& rec : log.records) {
    const std::vector<double> values = record_values(rec);
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += format_g17(values[i]);
    }
    out += line + "\n";
  }
  return out;
}

std::string run_log_json(const RunLog& log) {
  nlohmann::json j;
  j["meta"] = log.meta;
  j["outcome"] = to_string(log.outcome);
  j["abort_reason"] = log.abort_reason;
  j["columns"] = run_log_columns();
  nlohmann::json rows = nlohmann::json::array();
  for (const RunRecord& rec : log.records) {
    rows.push_back(record_values(rec));
  }
  j["records"] = std::move(rows);
  return j.dump(2) + "\n";
}

RunLog parse_run_log_csv(const std::string& text) {
  RunLog log;
  std::istringstream stream(text);
  std::string line;
  bool saw_header = false;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const std::string body = line.substr(2);
      const std::size_t sep = body.find(" = ");
      if (sep == std::string::npos) {
        throw std::runtime_error("malformed log comment line: " + line);
      }
      const std::string key = body.substr(0, sep);
      const std::string value = body.substr(sep + 3);
      if (key == "outcome") {
        log.outcome = outcome_from_string(value);
      } else if (key == "abort_reason") {
        log.abort_reason = value;
      } else {
        log.meta[key] = value;
      }
      continue;
    }
    if (!saw_header) {
      if (line != join_columns()) {
        throw std::runtime_error("log header does not match the expected schema");
      }
      saw_header = true;
      continue;
    }
    std::vector<double> values;
    values.reserve(run_log_columns().size());
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      values.push_back(std::strtod(cell.c_str(), nullptr));
    }
    log.records.push_back(record_from_values(values));
  }
  if (!saw_header) {
    throw std::runtime_error("log text has no header row");
  }

  double v_max = 0.0;
  Eigen::Vector3d r_d = Eigen::Vector3d::Zero();
  const auto v_it = log.meta.find("guidance.v_max");
  const auto r_it = log.meta.find("r_d");
  if (v_it != log.meta.end() && r_it != log.meta.end() &&
      parse_vec3_string(r_it->second, &r_d)) {
    v_max = std::strtod(v_it->second.c_str(), nullptr);
    log.finalize_aggregates(v_max, r_d);
  }
  return log;
}

}  // namespace sdfprox::sim
