#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "trailwatch/error.hpp"

namespace trailwatch {

// Structured-text configuration: INI-style tables with typed values.
//
//   [area]                 # table
//   name = "west ridge"    # string
//   bounds = [0, 0, 6000, 5000]
//   [[trail]]              # appends to the "trail" table array
//   points = [[0, 10], [250, 40]]
//
// Values: strings in double quotes, integers, floats, booleans, and arrays
// (nestable, may span lines until brackets balance). '#' starts a comment.
// The parser keeps everything; schema checks (including unknown-key errors)
// are the consumer's job via TableView.

class ConfigValue;
using ConfigArray = std::vector<ConfigValue>;

class ConfigValue {
 public:
  using Storage = std::variant<std::int64_t, double, bool, std::string, ConfigArray>;

  ConfigValue() : v_(std::int64_t{0}) {}
  explicit ConfigValue(Storage v) : v_(std::move(v)) {}

  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_double() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_array() const { return std::holds_alternative<ConfigArray>(v_); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_double() const {
    if (is_int()) return static_cast<double>(as_int());
    return std::get<double>(v_);
  }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const ConfigArray& as_array() const { return std::get<ConfigArray>(v_); }

  const char* type_name() const {
    switch (v_.index()) {
      case 0: return "integer";
      case 1: return "float";
      case 2: return "boolean";
      case 3: return "string";
      default: return "array";
    }
  }

 private:
  Storage v_;
};

struct ConfigTable {
  std::map<std::string, ConfigValue> values;
  std::map<std::string, ConfigTable> tables;
  std::map<std::string, std::vector<ConfigTable>> table_arrays;

  bool empty() const { return values.empty() && tables.empty() && table_arrays.empty(); }
};

namespace cfg_detail {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') ++line;
    ++pos;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  /// Whitespace, newlines and comments.
  void skip_blank(bool cross_lines) {
    for (;;) {
      skip_inline_ws();
      if (eof()) return;
      if (peek() == '#') {
        while (!eof() && peek() != '\n') advance();
        continue;
      }
      if (peek() == '\n' && cross_lines) {
        advance();
        continue;
      }
      return;
    }
  }

  std::string bare_key() {
    std::string k;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        k += c;
        advance();
      } else {
        break;
      }
    }
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::string quoted_string() {
    advance();  // opening quote
    std::string s;
    while (!eof() && peek() != '"') {
      char c = peek();
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        advance();
        if (eof()) fail("dangling escape");
        switch (peek()) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '"': s += '"'; break;
          case '\\': s += '\\'; break;
          default: fail("unsupported escape sequence");
        }
        advance();
        continue;
      }
      s += c;
      advance();
    }
    if (eof()) fail("unterminated string");
    advance();  // closing quote
    return s;
  }

  ConfigValue number() {
    const std::size_t start = pos;
    bool is_float = false;
    if (peek() == '+' || peek() == '-') advance();
    while (!eof()) {
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        advance();
        if (!eof() && (peek() == '+' || peek() == '-') && (c == 'e' || c == 'E'))
          advance();
      } else {
        break;
      }
    }
    const std::string tok = text.substr(start, pos - start);
    try {
      if (is_float)
        return ConfigValue{ConfigValue::Storage{std::stod(tok)}};
      return ConfigValue{ConfigValue::Storage{static_cast<std::int64_t>(std::stoll(tok))}};
    } catch (const std::exception&) {
      fail("malformed number '" + tok + "'");
    }
  }

  ConfigValue value() {
    skip_blank(/*cross_lines=*/false);
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"') return ConfigValue{ConfigValue::Storage{quoted_string()}};
    if (c == '[') {
      advance();
      ConfigArray arr;
      skip_blank(/*cross_lines=*/true);
      if (!eof() && peek() == ']') {
        advance();
        return ConfigValue{ConfigValue::Storage{std::move(arr)}};
      }
      for (;;) {
        arr.push_back(value());
        skip_blank(/*cross_lines=*/true);
        if (eof()) fail("unterminated array");
        if (peek() == ',') {
          advance();
          skip_blank(/*cross_lines=*/true);
          if (!eof() && peek() == ']') {  // trailing comma
            advance();
            break;
          }
          continue;
        }
        if (peek() == ']') {
          advance();
          break;
        }
        fail("expected ',' or ']' in array");
      }
      return ConfigValue{ConfigValue::Storage{std::move(arr)}};
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::string word = bare_key();
      if (word == "true") return ConfigValue{ConfigValue::Storage{true}};
      if (word == "false") return ConfigValue{ConfigValue::Storage{false}};
      fail("unquoted value '" + word + "' (strings need double quotes)");
    }
    if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)))
      return number();
    fail(std::string("unexpected character '") + c + "' in value");
  }

  void end_of_line() {
    skip_blank(/*cross_lines=*/false);
    if (eof()) return;
    if (peek() != '\n') fail("trailing characters after value");
    advance();
  }

  ConfigTable parse() {
    ConfigTable root;
    ConfigTable* current = &root;
    for (;;) {
      skip_blank(/*cross_lines=*/true);
      if (eof()) break;
      if (peek() == '[') {
        advance();
        const bool is_array = !eof() && peek() == '[';
        if (is_array) advance();
        skip_inline_ws();
        std::vector<std::string> path;
        path.push_back(bare_key());
        while (!eof() && peek() == '.') {
          advance();
          path.push_back(bare_key());
        }
        skip_inline_ws();
        if (eof() || peek() != ']') fail("unterminated section header");
        advance();
        if (is_array) {
          if (eof() || peek() != ']') fail("array-of-tables header needs ']]'");
          advance();
        }
        end_of_line();

        ConfigTable* parent = &root;
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
          parent = &parent->tables[path[i]];
        const std::string& leaf = path.back();
        if (is_array) {
          parent->table_arrays[leaf].emplace_back();
          current = &parent->table_arrays[leaf].back();
        } else {
          if (parent->tables.count(leaf) && !parent->tables[leaf].empty())
            fail("duplicate section [" + leaf + "]");
          current = &parent->tables[leaf];
        }
        continue;
      }
      const std::string key = bare_key();
      skip_inline_ws();
      if (eof() || peek() != '=') fail("expected '=' after key '" + key + "'");
      advance();
      if (current->values.count(key)) fail("duplicate key '" + key + "'");
      current->values[key] = value();
      end_of_line();
    }
    return root;
  }
};

}  // namespace cfg_detail

inline ConfigTable parse_config(const std::string& text) {
  return cfg_detail::Parser(text).parse();
}

/// Schema-checking accessor. Every read marks its key as consumed; done()
/// rejects whatever remains, so unknown keys are hard errors with a full path.
class TableView {
 public:
  TableView(const ConfigTable& t, std::string path) : t_(t), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(path_ + ": " + msg);
  }

  bool has_value(const std::string& key) const { return t_.values.count(key) != 0; }

  const ConfigValue& require(const std::string& key) {
    auto it = t_.values.find(key);
    if (it == t_.values.end()) fail("missing required key '" + key + "'");
    used_values_.insert(key);
    return it->second;
  }

  std::string require_string(const std::string& key) {
    const auto& v = require(key);
    if (!v.is_string()) fail("key '" + key + "' must be a string, got " + v.type_name());
    return v.as_string();
  }

  double require_double(const std::string& key) {
    const auto& v = require(key);
    if (!v.is_double() && !v.is_int())
      fail("key '" + key + "' must be numeric, got " + v.type_name());
    return v.as_double();
  }

  std::int64_t require_int(const std::string& key) {
    const auto& v = require(key);
    if (!v.is_int()) fail("key '" + key + "' must be an integer, got " + v.type_name());
    return v.as_int();
  }

  bool require_bool(const std::string& key) {
    const auto& v = require(key);
    if (!v.is_bool()) fail("key '" + key + "' must be a boolean, got " + v.type_name());
    return v.as_bool();
  }

  const ConfigArray& require_array(const std::string& key) {
    const auto& v = require(key);
    if (!v.is_array()) fail("key '" + key + "' must be an array, got " + v.type_name());
    return v.as_array();
  }

  double optional_double(const std::string& key, double fallback) {
    if (!has_value(key)) return fallback;
    return require_double(key);
  }

  std::int64_t optional_int(const std::string& key, std::int64_t fallback) {
    if (!has_value(key)) return fallback;
    return require_int(key);
  }

  std::string optional_string(const std::string& key, const std::string& fallback) {
    if (!has_value(key)) return fallback;
    return require_string(key);
  }

  bool optional_bool(const std::string& key, bool fallback) {
    if (!has_value(key)) return fallback;
    return require_bool(key);
  }

  bool has_table(const std::string& name) const { return t_.tables.count(name) != 0; }

  TableView table(const std::string& name) {
    auto it = t_.tables.find(name);
    if (it == t_.tables.end()) fail("missing required section [" + name + "]");
    used_tables_.insert(name);
    return TableView(it->second, path_ + "." + name);
  }

  TableView optional_table(const std::string& name) {
    used_tables_.insert(name);
    auto it = t_.tables.find(name);
    if (it == t_.tables.end()) return TableView(empty_table(), path_ + "." + name);
    return TableView(it->second, path_ + "." + name);
  }

  std::vector<TableView> table_array(const std::string& name) {
    used_arrays_.insert(name);
    std::vector<TableView> out;
    auto it = t_.table_arrays.find(name);
    if (it == t_.table_arrays.end()) return out;
    for (std::size_t i = 0; i < it->second.size(); ++i)
      out.emplace_back(it->second[i], path_ + "." + name + "[" + std::to_string(i) + "]");
    return out;
  }

  /// Reject everything not consumed. Call once all known keys are read.
  void done() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : t_.values)
      if (!used_values_.count(k)) unknown.push_back(k);
    for (const auto& [k, v] : t_.tables)
      if (!used_tables_.count(k)) unknown.push_back("[" + k + "]");
    for (const auto& [k, v] : t_.table_arrays)
      if (!used_arrays_.count(k)) unknown.push_back("[[" + k + "]]");
    if (!unknown.empty()) {
      std::string msg = "unknown key(s):";
      for (const auto& k : unknown) msg += " '" + k + "'";
      fail(msg);
    }
  }

  const std::string& path() const { return path_; }

 private:
  static const ConfigTable& empty_table() {
    static const ConfigTable t;
    return t;
  }

  const ConfigTable& t_;
  std::string path_;
  std::set<std::string> used_values_;
  std::set<std::string> used_tables_;
  std::set<std::string> used_arrays_;
};

}  // namespace trailwatch
