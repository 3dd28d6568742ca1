/// @file config.hpp
/// Flat key/value run configuration: dotted lowercase keys, `key = value`
/// lines, # comments, a strict registry of known keys, and environment
/// overrides through ACMORSE_<KEY> (dots become underscores; keys contain
/// no underscores, so the mapping is invertible).

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace acmorse {

class Config {
 public:
  /// Parses a config file. Unknown keys, duplicate keys, and lines without
  /// '=' throw std::invalid_argument carrying "<path>:<line>: ...".
  static Config parse_file(const std::string& path);
  /// Same grammar from an in-memory string; `origin` names it in diagnostics.
  static Config parse_text(const std::string& text, const std::string& origin = "<config>");

  /// Applies ACMORSE_* environment overrides for every registered key.
  /// Environment values win over file values.
  void apply_environment();

  bool has(const std::string& key) const;

  /// Typed getters. The no-default forms throw std::invalid_argument when
  /// the key is absent; all forms throw on a malformed value, naming the
  /// key and the line it came from.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t def) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::int64_t> get_ints(const std::string& key) const;

  /// Every known key, for usage text.
  static const std::vector<std::string>& known_keys();

 private:
  struct Entry {
    std::string value;
    std::string origin;  // "<path>:<line>" or "environment"
  };
  std::map<std::string, Entry> entries_;

  const Entry* find(const std::string& key) const;
  static void check_known(const std::string& key, const std::string& origin);
};

}  // namespace acmorse
