#include "sdfprox/common/flat_config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

#include "sdfprox/common/io_util.hpp"

namespace sdfprox {

const FlatConfig::Value& FlatConfig::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("config key missing: " + key);
  return it->second;
}

double FlatConfig::get_double(const std::string& key) const {
  const Value& v = at(key);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  throw std::runtime_error("config key is not a number: " + key);
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Value& v = at(key);
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  throw std::runtime_error("config key is not a boolean: " + key);
}

std::string FlatConfig::get_string(const std::string& key) const {
  const Value& v = at(key);
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  throw std::runtime_error("config key is not a string: " + key);
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::vector<double> FlatConfig::get_doubles(const std::string& key) const {
  const Value& v = at(key);
  if (std::holds_alternative<std::vector<double>>(v)) return std::get<std::vector<double>>(v);
  if (std::holds_alternative<double>(v)) return {std::get<double>(v)};
  throw std::runtime_error("config key is not a numeric array: " + key);
}

std::vector<double> FlatConfig::get_doubles(const std::string& key,
                                            const std::vector<double>& fallback) const {
  return has(key) ? get_doubles(key) : fallback;
}

namespace {

struct TomlCursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("toml parse error (line " + std::to_string(line) + "): " + msg);
  }
};

void skip_spaces(TomlCursor& c) {
  while (c.pos < c.text.size() && (c.text[c.pos] == ' ' || c.text[c.pos] == '\t')) ++c.pos;
}

bool at_line_end(const TomlCursor& c) {
  return c.pos >= c.text.size() || c.text[c.pos] == '\n' || c.text[c.pos] == '\r' ||
         c.text[c.pos] == '#';
}

void consume_line_end(TomlCursor& c) {
  if (c.pos < c.text.size() && c.text[c.pos] == '#') {
    while (c.pos < c.text.size() && c.text[c.pos] != '\n') ++c.pos;
  }
  if (c.pos < c.text.size() && c.text[c.pos] == '\r') ++c.pos;
  if (c.pos < c.text.size()) {
    if (c.text[c.pos] != '\n') c.fail("trailing characters after value");
    ++c.pos;
    ++c.line;
  }
}

bool is_bare_key_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
}

std::string parse_key_path(TomlCursor& c) {
  std::string key;
  while (true) {
    skip_spaces(c);
    std::string part;
    while (c.pos < c.text.size() && is_bare_key_char(c.text[c.pos])) part += c.text[c.pos++];
    if (part.empty()) c.fail("expected key");
    if (!key.empty()) key += '.';
    key += part;
    skip_spaces(c);
    if (c.pos < c.text.size() && c.text[c.pos] == '.') {
      ++c.pos;
      continue;
    }
    return key;
  }
}

std::string parse_basic_string(TomlCursor& c) {
  // c.text[c.pos] == '"'
  ++c.pos;
  std::string out;
  while (c.pos < c.text.size() && c.text[c.pos] != '"') {
    char ch = c.text[c.pos];
    if (ch == '\n') c.fail("unterminated string");
    if (ch == '\\') {
      ++c.pos;
      if (c.pos >= c.text.size()) c.fail("dangling escape");
      switch (c.text[c.pos]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: c.fail("unsupported escape sequence");
      }
      ++c.pos;
    } else {
      out += ch;
      ++c.pos;
    }
  }
  if (c.pos >= c.text.size()) c.fail("unterminated string");
  ++c.pos;  // closing quote
  return out;
}

double parse_number(TomlCursor& c) {
  std::size_t start = c.pos;
  while (c.pos < c.text.size() &&
         (std::isdigit(static_cast<unsigned char>(c.text[c.pos])) || c.text[c.pos] == '+' ||
          c.text[c.pos] == '-' || c.text[c.pos] == '.' || c.text[c.pos] == 'e' ||
          c.text[c.pos] == 'E' || c.text[c.pos] == '_')) {
    ++c.pos;
  }
  std::string token = c.text.substr(start, c.pos - start);
  std::erase(token, '_');
  if (token.empty()) c.fail("expected number");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) c.fail("malformed number: " + token);
  return v;
}

FlatConfig::Value parse_value(TomlCursor& c) {
  skip_spaces(c);
  if (c.pos >= c.text.size()) c.fail("expected value");
  const char ch = c.text[c.pos];
  if (ch == '"') return parse_basic_string(c);
  if (ch == '[') {
    ++c.pos;
    std::vector<double> nums;
    std::vector<std::string> strs;
    auto skip_filler = [&c] {
      while (c.pos < c.text.size()) {
        const char f = c.text[c.pos];
        if (f == ' ' || f == '\t' || f == '\r') {
          ++c.pos;
        } else if (f == '\n') {
          ++c.pos;
          ++c.line;
        } else if (f == '#') {
          while (c.pos < c.text.size() && c.text[c.pos] != '\n') ++c.pos;
        } else {
          break;
        }
      }
    };
    while (true) {
      skip_filler();
      if (c.pos >= c.text.size()) c.fail("unterminated array");
      if (c.text[c.pos] == ']') {
        ++c.pos;
        break;
      }
      if (c.text[c.pos] == '"') {
        strs.push_back(parse_basic_string(c));
      } else {
        nums.push_back(parse_number(c));
      }
      skip_filler();
      if (c.pos >= c.text.size()) c.fail("unterminated array");
      if (c.text[c.pos] == ',') {
        ++c.pos;
      } else if (c.text[c.pos] != ']') {
        c.fail("expected ',' or ']' in array");
      }
    }
    if (!strs.empty() && !nums.empty()) c.fail("mixed array element types");
    if (!strs.empty()) return strs;
    return nums;
  }
  if (c.text.compare(c.pos, 4, "true") == 0 &&
      (c.pos + 4 >= c.text.size() || !is_bare_key_char(c.text[c.pos + 4]))) {
    c.pos += 4;
    return true;
  }
  if (c.text.compare(c.pos, 5, "false") == 0 &&
      (c.pos + 5 >= c.text.size() || !is_bare_key_char(c.text[c.pos + 5]))) {
    c.pos += 5;
    return false;
  }
  return parse_number(c);
}

}  // namespace

FlatConfig parse_toml_lite(const std::string& text) {
  FlatConfig cfg;
  TomlCursor c{text};
  std::string section;
  while (c.pos < c.text.size()) {
    skip_spaces(c);
    if (at_line_end(c)) {
      consume_line_end(c);
      continue;
    }
    if (c.text[c.pos] == '[') {
      ++c.pos;
      section = parse_key_path(c);
      skip_spaces(c);
      if (c.pos >= c.text.size() || c.text[c.pos] != ']') c.fail("expected ']'");
      ++c.pos;
      skip_spaces(c);
      if (!at_line_end(c)) c.fail("trailing characters after table header");
      consume_line_end(c);
      continue;
    }
    const std::string key = parse_key_path(c);
    skip_spaces(c);
    if (c.pos >= c.text.size() || c.text[c.pos] != '=') c.fail("expected '=' after key");
    ++c.pos;
    FlatConfig::Value value = parse_value(c);
    skip_spaces(c);
    if (!at_line_end(c)) c.fail("trailing characters after value");
    consume_line_end(c);
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.set(full, std::move(value));
  }
  return cfg;
}

namespace {

void flatten_json(const nlohmann::json& j, const std::string& prefix, FlatConfig& cfg) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      flatten_json(it.value(), key, cfg);
    }
    return;
  }
  if (j.is_boolean()) {
    cfg.set(prefix, j.get<bool>());
  } else if (j.is_number()) {
    cfg.set(prefix, j.get<double>());
  } else if (j.is_string()) {
    cfg.set(prefix, j.get<std::string>());
  } else if (j.is_array()) {
    if (!j.empty() && j.front().is_string()) {
      cfg.set(prefix, j.get<std::vector<std::string>>());
    } else {
      cfg.set(prefix, j.get<std::vector<double>>());
    }
  } else if (j.is_null()) {
    // ignored
  } else {
    throw std::runtime_error("unsupported JSON value at config key: " + prefix);
  }
}

}  // namespace

FlatConfig parse_json_config(const std::string& text) {
  FlatConfig cfg;
  flatten_json(nlohmann::json::parse(text), "", cfg);
  return cfg;
}

FlatConfig load_config_file(const std::string& path) {
  const std::string text = read_text_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    return parse_json_config(text);
  }
  return parse_toml_lite(text);
}

}  // namespace sdfprox
