#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace robinlab {

// Error in a scenario config: the message always carries "<name>:<line>" and
// the offending field so failures point at the file, not at the runner.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigValue {
  enum class Kind { String, Number, Boolean, NumberArray, StringArray };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  bool flag = false;
  std::vector<double> numbers;
  std::vector<std::string> strings;
  int line = 0;
};

// Parsed key = value file with [table] headers. Keys are stored fully
// qualified ("verify.decay_oracle.tolerance"). Typed accessors throw
// ConfigError naming the field; *_or variants return the fallback when the
// key is absent but still reject a present value of the wrong type.
struct Config {
  std::string name;
  std::map<std::string, ConfigValue> entries;

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::vector<double> number_array(const std::string& key) const;
  std::vector<std::string> string_array(const std::string& key) const;

  // Immediate child table names under prefix, sorted: with entries
  // verify.a.tol and verify.b.c, subtables("verify") is {"a", "b"}.
  std::vector<std::string> subtables(const std::string& prefix) const;
  // New Config holding the entries under prefix with the prefix stripped.
  Config section(const std::string& prefix) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
};

// Grammar: '#' comments, blank lines, [table] / [table.sub] headers, and
// key = value lines where value is a quoted string, a number, true/false,
// or a homogeneous [v, v, ...] array of numbers or strings.
Config parse_config_text(const std::string& text, const std::string& name);
Config parse_config_file(const std::string& path);

}  // namespace robinlab
