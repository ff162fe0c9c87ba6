#include "robinlab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace robinlab {

namespace {

[[noreturn]] void raise(const std::string& name, int line, const std::string& msg) {
  throw ConfigError(name + ":" + std::to_string(line) + ": " + msg);
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Drops a trailing comment, honoring quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

bool valid_table(const std::string& t) {
  if (t.empty() || t.front() == '.' || t.back() == '.') return false;
  std::string part;
  std::istringstream ss(t);
  while (std::getline(ss, part, '.'))
    if (!valid_key(part)) return false;
  return true;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

ConfigValue parse_scalar(const std::string& name, int line, const std::string& raw) {
  ConfigValue v;
  v.line = line;
  std::string s = strip(raw);
  if (s.empty()) raise(name, line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      raise(name, line, "unterminated string");
    v.kind = ConfigValue::Kind::String;
    v.str = s.substr(1, s.size() - 2);
    if (v.str.find('"') != std::string::npos)
      raise(name, line, "stray quote inside string");
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::Boolean;
    v.flag = (s == "true");
    return v;
  }
  if (!parse_number(s, v.num))
    raise(name, line, "cannot parse value '" + s + "'");
  v.kind = ConfigValue::Kind::Number;
  return v;
}

ConfigValue parse_array(const std::string& name, int line, const std::string& body) {
  ConfigValue v;
  v.line = line;
  v.kind = ConfigValue::Kind::NumberArray;
  std::string inner = strip(body);
  if (inner.empty()) return v;  // empty array defaults to numbers
  std::vector<std::string> items;
  bool quoted = false;
  std::string cur;
  for (char c : inner) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  items.push_back(cur);
  bool strings = false, numbers = false;
  for (const std::string& item : items) {
    ConfigValue elem = parse_scalar(name, line, item);
    if (elem.kind == ConfigValue::Kind::String) {
      strings = true;
      v.strings.push_back(elem.str);
    } else if (elem.kind == ConfigValue::Kind::Number) {
      numbers = true;
      v.numbers.push_back(elem.num);
    } else {
      raise(name, line, "array elements must be numbers or strings");
    }
  }
  if (strings && numbers) raise(name, line, "mixed array element types");
  v.kind = strings ? ConfigValue::Kind::StringArray : ConfigValue::Kind::NumberArray;
  return v;
}

const ConfigValue& require(const Config& c, const std::string& key) {
  auto it = c.entries.find(key);
  if (it == c.entries.end())
    throw ConfigError(c.name + ": missing required field '" + key + "'");
  return it->second;
}

[[noreturn]] void wrong_type(const Config& c, const std::string& key,
                             const ConfigValue& v, const std::string& want) {
  throw ConfigError(c.name + ":" + std::to_string(v.line) + ": field '" + key +
                    "' must be " + want);
}

}  // namespace

bool Config::has(const std::string& key) const { return entries.count(key) > 0; }

double Config::number(const std::string& key) const {
  const ConfigValue& v = require(*this, key);
  if (v.kind != ConfigValue::Kind::Number) wrong_type(*this, key, v, "a number");
  return v.num;
}

double Config::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::string Config::text(const std::string& key) const {
  const ConfigValue& v = require(*this, key);
  if (v.kind != ConfigValue::Kind::String) wrong_type(*this, key, v, "a string");
  return v.str;
}

std::string Config::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

bool Config::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = entries.at(key);
  if (v.kind != ConfigValue::Kind::Boolean) wrong_type(*this, key, v, "true or false");
  return v.flag;
}

std::vector<double> Config::number_array(const std::string& key) const {
  const ConfigValue& v = require(*this, key);
  if (v.kind != ConfigValue::Kind::NumberArray)
    wrong_type(*this, key, v, "an array of numbers");
  return v.numbers;
}

std::vector<std::string> Config::string_array(const std::string& key) const {
  const ConfigValue& v = require(*this, key);
  if (v.kind != ConfigValue::Kind::StringArray)
    wrong_type(*this, key, v, "an array of strings");
  return v.strings;
}

std::vector<std::string> Config::subtables(const std::string& prefix) const {
  std::vector<std::string> names;
  std::string p = prefix + ".";
  for (const auto& [key, value] : entries) {
    if (key.rfind(p, 0) != 0) continue;
    std::string rest = key.substr(p.size());
    std::size_t dot = rest.find('.');
    if (dot == std::string::npos) continue;
    std::string child = rest.substr(0, dot);
    if (names.empty() || names.back() != child) names.push_back(child);
  }
  return names;  // map iteration is sorted already
}

Config Config::section(const std::string& prefix) const {
  Config out;
  out.name = name;
  std::string p = prefix + ".";
  for (const auto& [key, value] : entries)
    if (key.rfind(p, 0) == 0) out.entries[key.substr(p.size())] = value;
  return out;
}

void Config::fail(const std::string& key, const std::string& message) const {
  auto it = entries.find(key);
  int line = it == entries.end() ? 0 : it->second.line;
  throw ConfigError(name + ":" + std::to_string(line) + ": field '" + key + "' " +
                    message);
}

Config parse_config_text(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.name = name;
  std::istringstream in(text);
  std::string raw;
  std::string table;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = strip(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') raise(name, line, "unterminated table header");
      table = strip(s.substr(1, s.size() - 2));
      if (!valid_table(table)) raise(name, line, "invalid table name '" + table + "'");
      continue;
    }
    std::size_t eq = std::string::npos;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '=' && !quoted) {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos) raise(name, line, "expected key = value");
    std::string key = strip(s.substr(0, eq));
    if (!valid_key(key)) raise(name, line, "invalid key '" + key + "'");
    std::string value = strip(s.substr(eq + 1));
    if (value.empty()) raise(name, line, "missing value for '" + key + "'");
    ConfigValue v;
    if (value.front() == '[') {
      if (value.back() != ']') raise(name, line, "unterminated array");
      v = parse_array(name, line, value.substr(1, value.size() - 2));
    } else {
      v = parse_scalar(name, line, value);
    }
    std::string full = table.empty() ? key : table + "." + key;
    if (cfg.entries.count(full)) raise(name, line, "duplicate key '" + full + "'");
    cfg.entries[full] = v;
  }
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace robinlab
