#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kl {

// Flat key=value configuration file: one pair per line, '#' starts a comment,
// blank lines ignored. Duplicate and unknown keys are errors; every violation
// is reported with its line number in a single exception message.
class Config {
 public:
  // known_keys: the complete legal key set for the caller's context.
  static Config parse_file(const std::string& path,
                           const std::vector<std::string>& known_keys);
  static Config parse_text(const std::string& text,
                           const std::vector<std::string>& known_keys,
                           const std::string& origin = "<text>");

  // Apply KACL_<KEY> environment overrides (key uppercased, '.' and '-'
  // mapped to '_'); file < environment < explicit set().
  void apply_env(const std::vector<std::string>& known_keys);
  void set(const std::string& key, const std::string& value);  // highest precedence

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws invalid_parameter if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  // Comma-separated list of doubles.
  std::vector<double> get_list_or(const std::string& key,
                                  const std::vector<double>& fallback) const;

  const std::string& text() const { return text_; }  // raw file contents

 private:
  std::map<std::string, std::string> values_;
  std::string text_;
};

}  // namespace kl
