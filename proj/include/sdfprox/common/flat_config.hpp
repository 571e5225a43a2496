#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace sdfprox {

/**
 * Flat key/value view of a config file: nested tables are flattened to
 * dotted keys ("orbit.e", "guidance.omega"). Values keep only the shapes
 * the toolkit needs: bool, number, string, number array, string array.
 *
 * Loaders exist for a TOML subset (see parse_toml_lite) and for JSON,
 * so scenario files may use either format.
 */
class FlatConfig {
 public:
  using Value = std::variant<bool, double, std::string, std::vector<double>,
                             std::vector<std::string>>;

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  const std::map<std::string, Value>& entries() const { return values_; }

 private:
  const Value& at(const std::string& key) const;
  std::map<std::string, Value> values_;
};

/**
 * Parse a TOML subset: [table] / [table.sub] headers, dotted keys,
 * booleans, numbers, basic strings, homogeneous arrays, # comments.
 * No multi-line values, no datetimes, no inline tables, no arrays of tables.
 * Throws std::runtime_error with a line number on malformed input.
 */
FlatConfig parse_toml_lite(const std::string& text);

/// Flatten a JSON object (nlohmann syntax) into the same key space.
FlatConfig parse_json_config(const std::string& text);

/// Dispatch on file extension (.toml vs .json).
FlatConfig load_config_file(const std::string& path);

}  // namespace sdfprox
