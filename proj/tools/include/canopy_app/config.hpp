#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <canopy/error.hpp>

namespace canopy::app {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct KeyInfo {
  const char* name;
  const char* help;
  bool is_path = false;
};

// Every key accepted in a config file or as a `--key value` override.
const std::vector<KeyInfo>& known_keys();

// Flat `key = value` settings. Relative paths in a file resolve against the
// file's directory; relative paths given as overrides resolve against the
// working directory.
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::vector<std::string>& lines, const std::string& base_dir = "");

  void set(const std::string& key, const std::string& value, const std::string& base_dir = "");
  bool has(const std::string& key) const;

  std::string get(const std::string& key) const;  // ConfigError when missing
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::size_t get_size_or(const std::string& key, std::size_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // Resolved path. `must_exist` raises ConfigError naming the key when the
  // file is absent.
  std::string path(const std::string& key, bool must_exist = true) const;
  std::optional<std::string> optional_path(const std::string& key) const;

 private:
  struct Entry {
    std::string value;
    std::string base_dir;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace canopy::app
