// Flat key=value configuration. '#' starts a comment, whitespace is
// trimmed, later keys override earlier ones. Keys nobody reads are errors:
// call reject_unknown() once an experiment has pulled everything it wants.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace eggroll::harness {

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_str(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Throws if any key was never read, naming the offenders.
  void reject_unknown() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace eggroll::harness
