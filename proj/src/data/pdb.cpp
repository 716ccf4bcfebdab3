#include "cfp/data/pdb.hpp"

#include <charconv>
#include <map>
#include <optional>

#include "cfp/errors.hpp"

namespace cfp::data {

std::string to_string(AtomKind kind) { return kind == AtomKind::CB ? "CB" : "CA"; }

std::string Chain::sequence() const {
  std::string s;
  s.reserve(residues.size());
  for (const auto& r : residues) s += one_letter(r.name);
  return s;
}

char one_letter(std::string_view code) {
  static const std::map<std::string_view, char> table = {
      {"ALA", 'A'}, {"CYS", 'C'}, {"ASP", 'D'}, {"GLU", 'E'}, {"PHE", 'F'}, {"GLY", 'G'}, {"HIS", 'H'},
      {"ILE", 'I'}, {"LYS", 'K'}, {"LEU", 'L'}, {"MET", 'M'}, {"ASN", 'N'}, {"PRO", 'P'}, {"GLN", 'Q'},
      {"ARG", 'R'}, {"SER", 'S'}, {"THR", 'T'}, {"VAL", 'V'}, {"TRP", 'W'}, {"TYR", 'Y'}};
  const auto it = table.find(code);
  return it == table.end() ? 'X' : it->second;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(' ');
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(' ') - first + 1);
}

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what) {
  throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T field(std::string_view line, std::size_t begin, std::size_t width, const char* what, std::string_view origin,
        std::size_t line_no) {
  const std::string_view text = trim(line.substr(begin, width));
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    fail(origin, line_no, std::string("malformed ") + what + " field '" + std::string(line.substr(begin, width)) + "'");
  }
  return value;
}

struct Pending {
  char chain = ' ';
  int index = 0;
  std::string name;
  std::size_t line = 0;
  bool insertion = false;
  std::optional<std::array<double, 3>> cb;
  std::optional<std::array<double, 3>> ca;
};

}  // namespace

PdbStructure parse_pdb_text(std::string_view text, std::string_view origin) {
  PdbStructure out;
  out.source = std::string(origin);
  std::map<char, std::size_t> chain_index;
  std::optional<Pending> cur;

  auto flush = [&]() {
    if (!cur) return;
    Pending& p = *cur;
    if (p.insertion) {
      out.skipped.push_back({out.source, p.line, "insertion code on residue " + p.name + " " + std::to_string(p.index)});
    } else {
      const bool glycine = p.name == "GLY";
      std::optional<std::array<double, 3>> xyz = glycine ? p.ca : (p.cb ? p.cb : p.ca);
      if (!xyz) {
        out.skipped.push_back(
            {out.source, p.line, "residue " + p.name + " " + std::to_string(p.index) + " has neither CB nor CA"});
      } else {
        auto [it, inserted] = chain_index.emplace(p.chain, out.chains.size());
        if (inserted) out.chains.push_back(Chain{p.chain, {}});
        const AtomKind kind = (!glycine && p.cb) ? AtomKind::CB : AtomKind::CA;
        out.chains[it->second].residues.push_back({p.index, p.name, *xyz, kind});
      }
    }
    cur.reset();
  };

  std::map<char, int> last_index;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.starts_with("ENDMDL")) break;
    if (!line.starts_with("ATOM  ")) continue;
    if (line.size() < 54) fail(origin, line_no, "ATOM record shorter than 54 columns");

    const std::string atom(trim(line.substr(12, 4)));
    const char alt = line[16];
    const std::string res(trim(line.substr(17, 3)));
    const char chain = line[21];
    const int index = field<int>(line, 22, 4, "residue number", origin, line_no);
    const char icode = line[26];
    const std::array<double, 3> xyz = {field<double>(line, 30, 8, "x", origin, line_no),
                                       field<double>(line, 38, 8, "y", origin, line_no),
                                       field<double>(line, 46, 8, "z", origin, line_no)};

    if (!cur || cur->chain != chain || cur->index != index || cur->name != res || (icode != ' ') != cur->insertion) {
      flush();
      if (icode == ' ') {
        const auto it = last_index.find(chain);
        if (it != last_index.end() && index <= it->second) {
          fail(origin, line_no, "residue number " + std::to_string(index) + " does not increase in chain '" +
                                    std::string(1, chain) + "'");
        }
        last_index[chain] = index;
      }
      cur = Pending{chain, index, res, line_no, icode != ' ', {}, {}};
    }
    if (alt != ' ' && alt != 'A') continue;
    if (atom == "CB" && !cur->cb) cur->cb = xyz;
    if (atom == "CA" && !cur->ca) cur->ca = xyz;
  }
  flush();
  return out;
}

PdbStructure parse_pdb(const std::string& path) { return parse_pdb_text(read_text_file(path), path); }

}  // namespace cfp::data
