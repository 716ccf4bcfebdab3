#include "cfp/config_text.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cfp/errors.hpp"

namespace cfp {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ConfigMap parse_config_text(std::string_view text, std::string_view origin) {
  ConfigMap map;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    const auto line = trim(raw);
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key=value");
      }
      map[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return map;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string to_config_text(const ConfigMap& map) {
  std::string out;
  for (const auto& [k, v] : map) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::size_t get_size(const ConfigMap& map, const std::string& key, std::size_t fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  std::size_t value = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(key + ": expected a count, got '" + s + "'");
  return value;
}

double get_double(const ConfigMap& map, const std::string& key, double fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  double value = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(key + ": expected a number, got '" + s + "'");
  return value;
}

bool get_bool(const ConfigMap& map, const std::string& key, bool fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + it->second + "'");
}

std::string get_string(const ConfigMap& map, const std::string& key, const std::string& fallback) {
  const auto it = map.find(key);
  return it == map.end() ? fallback : it->second;
}

std::vector<std::string> get_list(const ConfigMap& map, const std::string& key,
                                  const std::vector<std::string>& fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  return split(it->second, ',');
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(sep);
    out += items[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(sep, start);
    out.emplace_back(trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace cfp
