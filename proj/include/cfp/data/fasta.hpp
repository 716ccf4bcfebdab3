#pragma once

#include <map>
#include <string>
#include <string_view>

namespace cfp::data {

// id -> residue string, ordered by id.
using SequenceTable = std::map<std::string, std::string>;

// Ids are the first whitespace-delimited token after '>'. Sequence lines are
// concatenated with surrounding whitespace removed; blank lines are ignored.
// FormatError (origin:line) for sequence data before the first header, an
// empty id, or a duplicate id.
SequenceTable parse_fasta_text(std::string_view text, std::string_view origin = "<fasta>");
SequenceTable parse_fasta(const std::string& path);

std::string to_fasta(const SequenceTable& table);

// Whole file as a string; DataError when it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace cfp::data
