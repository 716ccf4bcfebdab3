#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "cfp/data/ppi.hpp"

namespace cfp::data {

enum class AtomKind { CB, CA };
std::string to_string(AtomKind kind);

struct ResidueCoord {
  int index = 0;             // resSeq
  std::string name;          // three-letter code
  std::array<double, 3> xyz{};
  AtomKind atom = AtomKind::CB;
};

struct Chain {
  char id = ' ';
  std::vector<ResidueCoord> residues;

  // One-letter sequence; unrecognised residue names map to X.
  [[nodiscard]] std::string sequence() const;
};

struct PdbStructure {
  std::string source;
  std::vector<Chain> chains;  // order of first appearance
  std::vector<SkipRecord> skipped;
};

char one_letter(std::string_view three_letter);

// Fixed-width ATOM records of the first model only (HETATM and everything
// else is ignored). Per residue the CB coordinate is taken; GLY, and any
// residue without CB, falls back to CA. Atoms with altLoc other than ' ' or
// 'A' are ignored, and for duplicated atoms the first accepted one wins.
// Residues with an insertion code or with neither CB nor CA are skipped and
// reported. FormatError (origin:line) for a short or non-numeric ATOM line
// or residue numbers that do not increase within a chain.
PdbStructure parse_pdb_text(std::string_view text, std::string_view origin = "<pdb>");
PdbStructure parse_pdb(const std::string& path);

}  // namespace cfp::data
