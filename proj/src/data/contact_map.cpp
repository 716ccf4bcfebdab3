#include "cfp/data/contact_map.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "cfp/config_text.hpp"
#include "cfp/errors.hpp"

namespace cfp::data {

std::string to_string(Conformation tag) { return tag == Conformation::Native ? "native" : "interaction"; }

Conformation parse_conformation(std::string_view text) {
  if (text == "native") return Conformation::Native;
  if (text == "interaction") return Conformation::Interaction;
  throw ConfigError("conformation tag must be native or interaction, got '" + std::string(text) + "'");
}

ContactMap build_contact_map(std::span<const std::array<double, 3>> coords, double threshold, Conformation tag) {
  if (!(threshold > 0.0)) throw ConfigError("contact threshold must be positive");
  ContactMap map;
  map.n = coords.size();
  map.threshold = threshold;
  map.tag = tag;
  map.bits.assign(map.n * map.n, 0);
  for (std::size_t i = 0; i < map.n; ++i) {
    for (std::size_t j = i + 1; j < map.n; ++j) {
      const double dx = coords[i][0] - coords[j][0];
      const double dy = coords[i][1] - coords[j][1];
      const double dz = coords[i][2] - coords[j][2];
      const std::uint8_t bit = std::sqrt(dx * dx + dy * dy + dz * dz) < threshold ? 1 : 0;
      map.bits[i * map.n + j] = bit;
      map.bits[j * map.n + i] = bit;
    }
  }
  return map;
}

ContactMap build_contact_map(std::span<const ResidueCoord> residues, double threshold, Conformation tag) {
  std::vector<std::array<double, 3>> coords;
  coords.reserve(residues.size());
  for (const auto& r : residues) coords.push_back(r.xyz);
  return build_contact_map(coords, threshold, tag);
}

std::string to_text(const ContactMap& map) {
  std::string out = "n=" + std::to_string(map.n) + " threshold=" + format_double(map.threshold) +
                    " tag=" + to_string(map.tag) + "\n";
  for (std::size_t i = 0; i < map.n; ++i) {
    for (std::size_t j = 0; j < map.n; ++j) out += map(i, j) ? '1' : '0';
    out += '\n';
  }
  return out;
}

namespace {

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what) {
  throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

}  // namespace

ContactMap parse_contact_map_text(std::string_view text, std::string_view origin) {
  const auto lines = lines_of(text);
  if (lines.empty()) fail(origin, 1, "missing header");
  ContactMap map;
  bool have_n = false;
  bool have_threshold = false;
  bool have_tag = false;
  for (const std::string& token : split(lines[0], ' ')) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) fail(origin, 1, "malformed header token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "n") {
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), map.n);
      if (ec != std::errc() || ptr != value.data() + value.size()) fail(origin, 1, "bad n '" + value + "'");
      have_n = true;
    } else if (key == "threshold") {
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), map.threshold);
      if (ec != std::errc() || ptr != value.data() + value.size() || !(map.threshold > 0.0)) {
        fail(origin, 1, "bad threshold '" + value + "'");
      }
      have_threshold = true;
    } else if (key == "tag") {
      try {
        map.tag = parse_conformation(value);
      } catch (const ConfigError&) {
        fail(origin, 1, "bad tag '" + value + "'");
      }
      have_tag = true;
    } else {
      fail(origin, 1, "unknown header key '" + key + "'");
    }
  }
  if (!have_n || !have_threshold || !have_tag) fail(origin, 1, "header needs n, threshold and tag");
  if (lines.size() != map.n + 1) {
    fail(origin, lines.size(), "expected " + std::to_string(map.n) + " rows, found " + std::to_string(lines.size() - 1));
  }
  map.bits.assign(map.n * map.n, 0);
  for (std::size_t i = 0; i < map.n; ++i) {
    const std::string_view row = lines[i + 1];
    if (row.size() != map.n) {
      fail(origin, i + 2, "row has " + std::to_string(row.size()) + " columns, expected " + std::to_string(map.n));
    }
    for (std::size_t j = 0; j < map.n; ++j) {
      if (row[j] != '0' && row[j] != '1') fail(origin, i + 2, "unexpected character in row");
      map.bits[i * map.n + j] = row[j] == '1';
    }
  }
  for (std::size_t i = 0; i < map.n; ++i) {
    if (map(i, i)) fail(origin, i + 2, "diagonal entry set");
    for (std::size_t j = 0; j < i; ++j) {
      if (map(i, j) != map(j, i)) fail(origin, i + 2, "map is not symmetric");
    }
  }
  return map;
}

void write_contact_map(const std::string& path, const ContactMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << to_text(map);
  if (!out) throw DataError("failed writing " + path);
}

ContactMap read_contact_map(const std::string& path) { return parse_contact_map_text(read_text_file(path), path); }

}  // namespace cfp::data
