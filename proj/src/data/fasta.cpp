#include "cfp/data/fasta.hpp"

#include <fstream>
#include <sstream>

#include "cfp/errors.hpp"

namespace cfp::data {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what) {
  throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SequenceTable parse_fasta_text(std::string_view text, std::string_view origin) {
  SequenceTable table;
  std::string* current = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '>') {
      const std::string_view header = trim(line.substr(1));
      const std::string id(header.substr(0, header.find_first_of(" \t")));
      if (id.empty()) fail(origin, line_no, "header without an id");
      const auto [it, inserted] = table.emplace(id, std::string{});
      if (!inserted) fail(origin, line_no, "duplicate id '" + id + "'");
      current = &it->second;
    } else {
      if (current == nullptr) fail(origin, line_no, "sequence data before the first '>' header");
      current->append(line);
    }
    if (end == text.size()) break;
  }
  return table;
}

SequenceTable parse_fasta(const std::string& path) { return parse_fasta_text(read_text_file(path), path); }

std::string to_fasta(const SequenceTable& table) {
  std::string out;
  for (const auto& [id, residues] : table) {
    out += '>';
    out += id;
    out += '\n';
    out += residues;
    out += '\n';
  }
  return out;
}

}  // namespace cfp::data
