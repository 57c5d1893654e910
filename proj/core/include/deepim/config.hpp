#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepim {

/// Raised on malformed config files or bad option values (CLI maps this
/// family to its config-error exit code).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value file with [section] headers; keys are addressed as
/// "section.key". '#' and ';' start comments. Values keep internal
/// whitespace but are trimmed at both ends.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<stream>");
  static Config parse_file(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  /// Throws ConfigError when the key is missing.
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& def) const;

  long get_int(const std::string& key) const;
  long get_int_or(const std::string& key, long def) const;
  double get_real(const std::string& key) const;
  double get_real_or(const std::string& key, double def) const;
  bool get_bool_or(const std::string& key, bool def) const;
  std::uint64_t get_seed_or(const std::string& key, std::uint64_t def) const;

  /// Comma-separated values.
  std::vector<std::string> get_list_or(const std::string& key,
                                       const std::vector<std::string>& def) const;
  std::vector<double> get_real_list_or(const std::string& key,
                                       const std::vector<double>& def) const;
  std::vector<int> get_int_list_or(const std::string& key,
                                   const std::vector<int>& def) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace deepim
