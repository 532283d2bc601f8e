#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace genderprobe {

// Flat key/value configuration. Files use a TOML subset:
//   # comment
//   key = value            bare word, number or bool
//   key = "quoted string"
//   key = [a, "b", 3]      stored as a comma-joined list
//   [section]              prefixes following keys with "section."
// A JSON report (or any JSON object with a "config" member of strings) is
// accepted too, so report snapshots can be fed back in.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view content, const std::filesystem::path& base_dir = {});
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  // Applies `key=value`.
  void set_override(std::string_view assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback = {}) const;
  // Relative paths resolve against the directory of the config file.
  std::filesystem::path get_path(const std::string& key, const std::filesystem::path& fallback = {}) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

}  // namespace genderprobe
