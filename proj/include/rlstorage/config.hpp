#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rlstorage {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `section.key = value` settings. Blank lines and `#` comments are
/// ignored; later assignments override earlier ones.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.contains(key); }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_uints(const std::string& key, const std::vector<std::uint64_t>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Keys under `prefix` (e.g. "preset.kv-random.").
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  /// Keys never read through a getter.
  std::vector<std::string> unused_keys() const;

  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

std::vector<std::string> split_list(std::string_view s, char sep = ',');
std::string trim(std::string_view s);

}  // namespace rlstorage
