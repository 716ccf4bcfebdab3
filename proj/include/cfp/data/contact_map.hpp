#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfp/data/pdb.hpp"

namespace cfp::data {

enum class Conformation { Native, Interaction };
std::string to_string(Conformation tag);
Conformation parse_conformation(std::string_view text);

inline constexpr double kDefaultContactThreshold = 8.0;

struct ContactMap {
  std::size_t n = 0;
  double threshold = kDefaultContactThreshold;
  Conformation tag = Conformation::Native;
  std::vector<std::uint8_t> bits;  // n x n, row-major

  [[nodiscard]] bool operator()(std::size_t i, std::size_t j) const { return bits[i * n + j] != 0; }
  bool operator==(const ContactMap&) const = default;
};

// bits[i][j] = (Euclidean distance < threshold), diagonal false.
ContactMap build_contact_map(std::span<const std::array<double, 3>> coords, double threshold = kDefaultContactThreshold,
                             Conformation tag = Conformation::Native);
ContactMap build_contact_map(std::span<const ResidueCoord> residues, double threshold = kDefaultContactThreshold,
                             Conformation tag = Conformation::Native);

// "n=<n> threshold=<t> tag=<native|interaction>" then n lines of n '0'/'1'.
std::string to_text(const ContactMap& map);
ContactMap parse_contact_map_text(std::string_view text, std::string_view origin = "<contacts>");
void write_contact_map(const std::string& path, const ContactMap& map);
ContactMap read_contact_map(const std::string& path);

}  // namespace cfp::data
