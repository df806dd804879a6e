#pragma once

// `key = value` files with `#` comments, used for the twin config and the
// simulator constants table.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace casetwin {

class KvFile {
 public:
  /// Throws ParseError on a line without '=' or a repeated key.
  static KvFile parse(std::string_view source);
  static KvFile load(const std::string& path);  // IoError / ParseError

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
  /// Typed getters throw ParseError naming the key's line on malformed values.
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::pair<std::string, int>>& entries() const { return entries_; }
  void set(const std::string& key, std::string value) { entries_[key] = {std::move(value), 0}; }

 private:
  std::map<std::string, std::pair<std::string, int>> entries_;  // key -> (value, line)
};

}  // namespace casetwin
