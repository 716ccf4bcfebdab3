#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cfp {

// Flat key=value configuration. Keys are unique; serialisation is sorted by
// key, one "key=value" per line, so equal maps give byte-identical text.
using ConfigMap = std::map<std::string, std::string>;

// Blank lines and lines starting with '#' are ignored. Malformed lines raise
// ConfigError naming `origin` and the line number.
ConfigMap parse_config_text(std::string_view text, std::string_view origin = "<config>");
ConfigMap read_config_file(const std::string& path);
std::string to_config_text(const ConfigMap& map);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t hash);

// Typed accessors; parse failures raise ConfigError naming the key.
std::size_t get_size(const ConfigMap& map, const std::string& key, std::size_t fallback);
double get_double(const ConfigMap& map, const std::string& key, double fallback);
bool get_bool(const ConfigMap& map, const std::string& key, bool fallback);
std::string get_string(const ConfigMap& map, const std::string& key, const std::string& fallback);
std::vector<std::string> get_list(const ConfigMap& map, const std::string& key, const std::vector<std::string>& fallback);

std::string format_double(double value);
std::string join(const std::vector<std::string>& items, char sep = ',');
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace cfp
