#include "deepim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace deepim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& origin) {
  Config cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.entries_[full] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse(in, path.string());
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& def) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? def : it->second;
}

long Config::get_int(const std::string& key) const {
  const std::string v = get(key);
  long out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config key " + key + " is not an integer: " + v);
  }
  return out;
}

long Config::get_int_or(const std::string& key, long def) const {
  return has(key) ? get_int(key) : def;
}

double Config::get_real(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + v);
  }
}

double Config::get_real_or(const std::string& key, double def) const {
  return has(key) ? get_real(key) : def;
}

bool Config::get_bool_or(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + v);
}

std::uint64_t Config::get_seed_or(const std::string& key, std::uint64_t def) const {
  if (!has(key)) return def;
  const std::string v = get(key);
  std::uint64_t out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config key " + key + " is not a seed value: " + v);
  }
  return out;
}

std::vector<std::string> Config::get_list_or(
    const std::string& key, const std::vector<std::string>& def) const {
  if (!has(key)) return def;
  return split_commas(get(key));
}

std::vector<double> Config::get_real_list_or(const std::string& key,
                                             const std::vector<double>& def) const {
  if (!has(key)) return def;
  std::vector<double> out;
  for (const std::string& item : split_commas(get(key))) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " holds a non-number: " + item);
    }
  }
  return out;
}

std::vector<int> Config::get_int_list_or(const std::string& key,
                                         const std::vector<int>& def) const {
  if (!has(key)) return def;
  std::vector<int> out;
  for (const std::string& item : split_commas(get(key))) {
    int v{};
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || p != item.data() + item.size()) {
      throw ConfigError("config key " + key + " holds a non-integer: " + item);
    }
    out.push_back(v);
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

}  // namespace deepim
