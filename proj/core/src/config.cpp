#include "kacl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kacl/errors.hpp"

namespace kl {

namespace {
std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string env_name(const std::string& key) {
  std::string out = "KACL_";
  for (char c : key) {
    if (c == '.' || c == '-') {
      out += '_';
    } else {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}
}  // namespace

Config Config::parse_text(const std::string& text,
                          const std::vector<std::string>& known_keys,
                          const std::string& origin) {
  Config cfg;
  cfg.text_ = text;
  std::map<std::string, int> first_line;
  std::vector<std::string> violations;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      violations.push_back("line " + std::to_string(lineno) +
                           ": expected key=value, got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      violations.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (std::find(known_keys.begin(), known_keys.end(), key) ==
        known_keys.end()) {
      violations.push_back("line " + std::to_string(lineno) +
                           ": unknown key '" + key + "'");
      continue;
    }
    auto it = first_line.find(key);
    if (it != first_line.end()) {
      violations.push_back("line " + std::to_string(lineno) +
                           ": duplicate key '" + key + "' (first set on line " +
                           std::to_string(it->second) + ")");
      continue;
    }
    first_line[key] = lineno;
    cfg.values_[key] = value;
  }
  if (!violations.empty()) {
    std::string msg = origin + ": " + std::to_string(violations.size()) +
                      " configuration error(s):";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw invalid_parameter(msg);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path,
                          const std::vector<std::string>& known_keys) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), known_keys, path);
}

void Config::apply_env(const std::vector<std::string>& known_keys) {
  for (const std::string& key : known_keys) {
    if (const char* v = std::getenv(env_name(key).c_str())) {
      values_[key] = v;
    }
  }
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw invalid_parameter("missing required config key '" + key + "'");
  }
  return it->second;
}

std::string Config::get_or(const std::string& key,
                           const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get(key);
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw invalid_parameter("config key '" + key + "': '" + s + "' is not a number");
  }
  if (pos != s.size()) {
    throw invalid_parameter("config key '" + key + "': '" + s + "' is not a number");
  }
  return v;
}

double Config::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string s = get(key);
  std::size_t pos = 0;
  std::int64_t v;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw invalid_parameter("config key '" + key + "': '" + s + "' is not an integer");
  }
  if (pos != s.size()) {
    throw invalid_parameter("config key '" + key + "': '" + s + "' is not an integer");
  }
  return v;
}

std::int64_t Config::get_int_or(const std::string& key,
                                std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw invalid_parameter("config key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<double> Config::get_list_or(
    const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  std::istringstream is(get(key));
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw invalid_parameter("config key '" + key + "': '" + item +
                              "' is not a number");
    }
  }
  return out;
}

}  // namespace kl
